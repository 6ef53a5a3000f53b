"""Numerical monodromy of opers along circular contours and the first-order expansion oracle."""

from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import ContourConflict, IntegrationFailure, NoSingleValuedSolution
from .opers import Sl2Oper, SlnOper, _is_int

THREADS_ENV = "AFFGAUDIN_THREADS"


def default_lambda_grid() -> List[complex]:
    return [0j] + [complex(np.exp(2j * np.pi * j / 8)) for j in range(8)]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    samples: int = 256

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def point(self, theta):
        return self.center + self.radius * np.exp(1j * theta)

    def velocity(self, theta):
        return 1j * self.radius * np.exp(1j * theta)

    def encloses(self, p: complex) -> bool:
        return abs(p - self.center) < self.radius

    def check(self, singular: Sequence[complex], branch_at_zero: bool = False):
        for p in singular:
            if abs(abs(complex(p) - self.center) - self.radius) < self.radius * 1e-3:
                raise ContourConflict(f"contour passes within the margin of singular point {complex(p):.6g}")
        if branch_at_zero and abs(self.center) <= self.radius * (1 + 1e-3):
            raise ContourConflict("contour around 0 with a non-integer spectral exponent")

    def sample(self) -> np.ndarray:
        th = np.linspace(0, 2 * np.pi, self.samples, endpoint=False)
        return self.point(th)


@dataclass
class MonodromyResult:
    matrix: np.ndarray
    deviation_from_identity: float
    wronskian_deviation: float
    lam: complex
    contour: Contour
    steps: int
    nfev: int
    rtol: float
    trajectory: Optional[np.ndarray] = None

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def to_json(self) -> dict:
        c = lambda z: [complex(z).real, complex(z).imag]
        return {
            "matrix": [[c(x) for x in row] for row in self.matrix],
            "deviation_from_identity": self.deviation_from_identity,
            "wronskian_deviation": self.wronskian_deviation,
            "lambda": c(self.lam),
            "contour": {"center": c(self.contour.center), "radius": self.contour.radius},
            "steps": self.steps, "nfev": self.nfev, "rtol": self.rtol,
        }


def _branch_at_zero(op) -> bool:
    if isinstance(op, Sl2Oper) and op.k is None:
        return False
    return not _is_int(op.k)


def _system_matrix(op, lam: complex, branch_point: Optional[complex]):
    """z -> companion matrix of the first-order system Y' = A(z) Y."""
    if isinstance(op, Sl2Oper):
        def A(z):
            q = op.v(z) + lam * op.spectral(z, branch_point)
            return np.array([[0, 1], [q, 0]], dtype=complex)
        return A, 2
    n = op.n
    sgn = (-1) ** n

    def A(z):
        M = np.zeros((n, n), dtype=complex)
        M[np.arange(n - 1), np.arange(1, n)] = 1
        # y^(n) = (-1)^n [sum_r v_r (-1)^{n-1-r} y^(n-1-r) + lam z^k y]
        for r, c in enumerate(op.coeffs, start=1):
            j = n - 1 - r
            M[n - 1, j] += sgn * (-1) ** j * c(z)
        M[n - 1, 0] += sgn * lam * op.spectral(z, branch_point)
        return M
    return A, n


def _integrate(rhs, y0: np.ndarray, rtol: float, dense: bool = False):
    sol = solve_ivp(rhs, (0.0, 2 * np.pi), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2,
                    dense_output=dense)
    if sol.status != 0:
        raise IntegrationFailure(f"integration failed: {sol.message}")
    return sol


def _normalized_deviation(M: np.ndarray) -> float:
    n = M.shape[0]
    d = np.linalg.det(M)
    if d == 0:
        return float("inf")
    return float(np.max(np.abs(M / d ** (1.0 / n) - np.eye(n))))


def monodromy_matrix(op: Union[Sl2Oper, SlnOper], c: Contour, lam: complex = 0j, rtol: float = 1e-10,
                     keep_trajectory: bool = False) -> MonodromyResult:
    lam = complex(lam)
    c.check(op.singular_points(), _branch_at_zero(op))
    branch = c.center if (_branch_at_zero(op) or (isinstance(op, Sl2Oper) and op.k is None)) else None
    A, n = _system_matrix(op, lam, branch)

    def rhs(t, y):
        Y = y.reshape(n, n)
        return (A(c.point(t)) @ Y * c.velocity(t)).ravel()

    sol = _integrate(rhs, np.eye(n, dtype=complex).ravel(), rtol, dense=keep_trajectory)
    M = sol.y[:, -1].reshape(n, n)
    det = complex(np.linalg.det(M))
    traj = None
    if keep_trajectory:
        th = np.linspace(0, 2 * np.pi, c.samples)
        traj = np.column_stack([th, c.point(th), sol.sol(th).T])
    return MonodromyResult(M, _normalized_deviation(M), abs(det - 1), lam, c, len(sol.t) - 1, sol.nfev,
                           rtol, traj)


@dataclass
class PointVerdict:
    w: complex
    radius: float
    deviations: List[float]
    wronskian: List[float]
    passed: bool

    @property
    def max_deviation(self) -> float:
        return max(self.deviations) if self.deviations else 0.0

    def to_json(self) -> dict:
        return {"w": [self.w.real, self.w.imag], "radius": self.radius, "deviations": self.deviations,
                "wronskian_deviations": self.wronskian, "max_deviation": self.max_deviation,
                "verdict": "PASS" if self.passed else "FAIL"}


@dataclass
class TrivialityReport:
    points: List[PointVerdict]
    lam_grid: List[complex]
    tol: float
    results: List[MonodromyResult] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    @property
    def max_deviation(self) -> float:
        return max((p.max_deviation for p in self.points), default=0.0)

    @property
    def max_wronskian_deviation(self) -> float:
        return max((max(p.wronskian) for p in self.points if p.wronskian), default=0.0)

    def to_json(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "tol": self.tol,
            "lambda_grid": [[z.real, z.imag] for z in self.lam_grid],
            "note": "finite lambda grid corroborates the algebraic conditions",
            "max_deviation": self.max_deviation,
            "max_wronskian_deviation": self.max_wronskian_deviation,
            "points": [p.to_json() for p in self.points],
        }


def _regular_part(op, w: complex):
    """v minus its principal part at w (scalar opers), as a callable."""
    if isinstance(op, Sl2Oper):
        reg = op.v.drop_pole(w)
        return reg
    return None


def contour_for(op, w: complex, radius: Optional[float] = None, lam_max: float = 1.0,
                max_growth: float = 6.0) -> Contour:
    """Circle around w.

    Default radius is half the distance to the nearest other singularity, halved further while the
    WKB growth estimate 2 pi r sqrt(max |regular part of the potential|) exceeds ``max_growth``;
    large growth makes the monodromy ill-conditioned in double precision.
    """
    w = complex(w)
    others = [complex(p) for p in op.singular_points() if abs(complex(p) - w) > 1e-12]
    if _branch_at_zero(op):
        if abs(w) < 1e-12:
            raise ContourConflict("cannot encircle 0 with a non-integer spectral exponent")
        if all(abs(p) > 1e-12 for p in others):
            others.append(0j)
    if isinstance(op, Sl2Oper) and op.k is None:
        others += [complex(z) for z, k in zip(op.sites, op.exponents) if not _is_int(k) and abs(z - w) > 1e-12]
    dmin = min((abs(p - w) for p in others), default=np.inf)
    if dmin < 1e-9:
        raise ContourConflict("point coincides with another singularity")
    if radius is not None and radius < dmin * (1 - 1e-3):
        return Contour(w, float(radius))
    r = 0.5 * dmin if np.isfinite(dmin) else 1.0
    reg = _regular_part(op, w)
    if reg is not None:
        th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        while r > 1e-3 * min(dmin, 1.0):
            z = w + r * np.exp(1j * th)
            q = np.abs(reg(z)) + lam_max * np.abs(op.spectral(z, w if _branch_at_zero(op) else None))
            if 2 * np.pi * r * np.sqrt(np.max(q)) <= max_growth:
                break
            r *= 0.5
    return Contour(w, float(r))


def triviality_scan(op, points: Optional[Sequence[complex]] = None, lam_grid: Optional[Sequence[complex]] = None,
                    tol: float = 1e-6, radius: Optional[float] = None, rtol: float = 1e-10,
                    threads: Optional[int] = None) -> TrivialityReport:
    if points is None:
        points = [m.w for m in getattr(op, "marked", [])]
    grid = default_lambda_grid() if lam_grid is None else [complex(x) for x in lam_grid]
    lam_max = max((abs(x) for x in grid), default=1.0)
    contours = [contour_for(op, w, radius, lam_max) for w in points]
    jobs = [(i, lam) for i in range(len(contours)) for lam in grid]
    threads = default_threads() if threads is None else max(1, int(threads))

    def run(job):
        i, lam = job
        return monodromy_matrix(op, contours[i], lam, rtol)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    verdicts = []
    for i, cont in enumerate(contours):
        rs = [r for (j, _), r in zip(jobs, results) if j == i]
        devs = [r.deviation_from_identity for r in rs]
        verdicts.append(PointVerdict(complex(points[i]), cont.radius, devs,
                                     [r.wronskian_deviation for r in rs], all(d < tol for d in devs)))
    return TrivialityReport(verdicts, grid, tol, results)


# ---------------------------------------------------------------------------
# first-order expansion of the monodromy


def _phi(spec: str):
    """Invariant function of the monodromy and its gradient G with d phi = tr(G M^{-1} dM)."""
    if spec == "trace":
        return (lambda M: complex(np.trace(M))), (lambda M: M)
    m = re.fullmatch(r"trace\^(\d+)", spec)
    if m:
        p = int(m.group(1))
        return (lambda M: complex(np.trace(np.linalg.matrix_power(M, p)))), \
               (lambda M: p * np.linalg.matrix_power(M, p))
    raise ValueError(f"unknown invariant function {spec!r}")


def _fundamental(A: Callable, c: Contour, n: int, rtol: float, dense: bool = False):
    def rhs(t, y):
        return (-(A(c.point(t)) * c.velocity(t)) @ y.reshape(n, n)).ravel()
    return _integrate(rhs, np.eye(n, dtype=complex).ravel(), rtol, dense)


@dataclass
class LinearTermResult:
    lhs: complex
    rhs: complex
    step: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0

    def __iter__(self):
        return iter((self.lhs, self.rhs))


def epsilon_linear_term(A0: Callable, A1: Callable, phi: str, c: Contour, n: Optional[int] = None,
                        step: float = 2e-3, rtol: float = 1e-12) -> LinearTermResult:
    """d phi(M(eps))/d eps at 0 for d/dt + A0 + eps A1, computed two ways.

    lhs: Richardson-extrapolated central differences of the integrated monodromy.
    rhs: -contour integral of tr(A1 Psi) with Psi the single-valued adjoint solution.
    """
    if n is None:
        n = np.asarray(A0(c.center + c.radius)).shape[0]
    f, grad = _phi(phi)

    def mono(eps):
        return _fundamental(lambda t: A0(t) + eps * A1(t), c, n, rtol).y[:, -1].reshape(n, n)

    def central(h):
        return (f(mono(h)) - f(mono(-h))) / (2 * h)

    lhs = (4 * central(step / 2) - central(step)) / 3

    M = mono(0.0)
    # adjoint monodromy on gl_n: X -> M X M^{-1}
    Minv = np.linalg.inv(M)
    ad = np.kron(M, Minv.T)
    vals, vecs = np.linalg.eig(ad)
    fixed = vecs[:, np.abs(vals - 1) < 1e-6]
    if fixed.shape[1] == 0:
        raise NoSingleValuedSolution("adjoint monodromy has no eigenvalue 1")
    G = grad(M).ravel()
    coef, *_ = np.linalg.lstsq(fixed, G, rcond=None)
    psi0 = fixed @ coef
    if np.linalg.norm(psi0 - G) > 1e-6 * max(1.0, np.linalg.norm(G)):
        raise NoSingleValuedSolution("gradient of phi is not a single-valued adjoint solution")

    def rhs(t, y):
        Psi = y[:-1].reshape(n, n)
        z, dz = c.point(t), c.velocity(t)
        a0 = A0(z)
        dpsi = (Psi @ a0 - a0 @ Psi) * dz
        return np.concatenate([dpsi.ravel(), [-np.trace(A1(z) @ Psi) * dz]])

    sol = _integrate(rhs, np.concatenate([psi0, [0j]]), rtol)
    return LinearTermResult(complex(lhs), complex(sol.y[-1, -1]), step)


__all__ = [
    "Contour", "MonodromyResult", "PointVerdict", "TrivialityReport", "LinearTermResult",
    "monodromy_matrix", "triviality_scan", "contour_for", "epsilon_linear_term", "default_lambda_grid",
    "default_threads", "THREADS_ENV",
]
