"""Quantum Gaudin models, Bethe equations and affine opers."""

__version__ = "0.1.0"
