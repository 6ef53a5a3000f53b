"""Quadratic quantum Hamiltonians as exact sparse matrices on graded modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .algebra.lie import AlgebraData, WeightVector, build_algebra
from .algebra.modules import (
    D_IDX,
    K_IDX,
    GradedModule,
    LoopAlgebra,
    TensorModule,
    Vector,
    _add,
    tensor,
)
from .exceptions import CriticalLevel, DegenerateSites, SingularShift, ZeroLevel
from .sparse import SparseMatrix, frac

MODELS = ("shift_argument_finite", "shift_argument_affine", "regular_singularities", "gko_two_point",
          "kdv", "rational_kdv")


@dataclass
class ModelSpec:
    model: str
    algebra: AlgebraData
    sites: List[complex] = field(default_factory=list)
    levels: List = field(default_factory=list)
    shift: Optional[WeightVector] = None
    weights: List[WeightVector] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.algebra, str):
            self.algebra = build_algebra(self.algebra)
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.weights = [w if isinstance(w, WeightVector) else WeightVector(tuple(w)) for w in self.weights]
        if self.shift is not None and not isinstance(self.shift, WeightVector):
            self.shift = WeightVector(tuple(self.shift))
        self.levels = [frac(k) for k in self.levels]

    def check_sites(self):
        z = list(self.sites)
        for i in range(len(z)):
            for j in range(i):
                if z[i] == z[j]:
                    raise DegenerateSites("sites must be pairwise distinct")

    def shift_pairings(self) -> Dict[tuple, object]:
        """(alpha, chi) for every positive root; raises if chi is not regular."""
        if self.shift is None:
            raise SingularShift("model needs a shift")
        alg = self.algebra
        out = {}
        for r in alg.positive_roots:
            v = alg.root_weight_inner(r, self.shift.coords)
            if v == 0:
                raise SingularShift("shift is not regular")
            out[r] = v
        return out


@dataclass
class OperatorMatrix:
    """Operator restricted to the retained basis of a module."""

    module: GradedModule
    matrix: SparseMatrix
    name: str = ""
    apply: Optional[Callable[[Vector], Vector]] = field(default=None, repr=False, compare=False)

    def __matmul__(self, other: "OperatorMatrix") -> SparseMatrix:
        return self.matrix @ other.matrix

    def commutator(self, other: "OperatorMatrix") -> SparseMatrix:
        return self.matrix.commutator(other.matrix)

    def block(self, bkey) -> np.ndarray:
        idx = self.module.block_indices(bkey)
        return self.matrix.submatrix(idx).to_dense()

    def block_exact(self, bkey) -> SparseMatrix:
        return self.matrix.submatrix(self.module.block_indices(bkey))

    def spectrum(self) -> np.ndarray:
        vals = []
        for bkey in self.module.blocks:
            b = self.block(bkey)
            if b.size:
                vals.extend(np.linalg.eigvals(b))
        return np.array(vals)

    def to_coo(self) -> List[dict]:
        """Entries keyed by block; values as strings when exact."""
        basis = self.module.basis
        out = []
        for i, j, v in self.matrix.items():
            g, beta = self.module.block_of(basis[i])
            out.append({"row": i, "col": j, "grade": g, "beta": list(beta),
                        "value": str(v) if isinstance(v, (int, Fraction)) else [complex(v).real, complex(v).imag]})
        return out


def _operator(m: GradedModule, fn: Callable[[Vector], Vector], name: str, strict: bool = True) -> OperatorMatrix:
    return OperatorMatrix(m, m.matrix(fn, strict=strict), name, fn)


def _key_grade(m: GradedModule, key) -> int:
    return m.block_of(key)[0] if key in m.index else m.mono_block(key)[0]


def _per_key(m: GradedModule, fn_key: Callable[[object], Vector]) -> Callable[[Vector], Vector]:
    def fn(vec: Vector) -> Vector:
        out: Vector = {}
        for key, c in vec.items():
            for k2, c2 in fn_key(key).items():
                _add(out, k2, c * c2)
        return out
    return fn


def _loop(m: GradedModule) -> LoopAlgebra:
    loop = getattr(m, "loop", None)
    if loop is None:
        loop = m.factors[0].loop
    return loop


def _dual_letters(loop: LoopAlgebra, a: int, n: int) -> Dict:
    return {(n, b): c for b, c in loop.real.dual[a].items()}


# ---------------------------------------------------------------------------
# Gaudin


def casimir_pair(t: TensorModule, i: int, j: int) -> Callable[[Vector], Vector]:
    """Omega^{(ij)} = sum J_a^{(i)} J^{a(j)}; affine: modes J_{a,n} (x) J^a_{-n} plus K (x) d + d (x) K."""
    loop = _loop(t)
    dim = loop.real.dim
    affine = t.algebra.is_affine

    def on_key(key) -> Vector:
        out: Vector = {}
        gi = t.factors[i].mono_block(key[i])[0] if affine else 0
        gj = t.factors[j].mono_block(key[j])[0] if affine else 0
        base = {key: Fraction(1)}
        for n in range(-gj, gi + 1):
            for a in range(dim):
                for dl, c in _dual_letters(loop, a, -n).items():
                    v = t.act((j, dl), base)
                    if v:
                        v = t.act((i, (n, a)), v)
                        for k2, x in v.items():
                            _add(out, k2, c * x)
        if affine:
            for first, second in (((i, (0, K_IDX)), (j, (0, D_IDX))), ((i, (0, D_IDX)), (j, (0, K_IDX)))):
                for k2, x in t.act(first, t.act(second, base)).items():
                    _add(out, k2, x)
        return out

    return _per_key(t, on_key)


def gaudin_quadratic(spec: ModelSpec, m: TensorModule) -> List[OperatorMatrix]:
    """Xi_i = sum_{j != i} Omega^{(ij)} / (z_i - z_j)."""
    spec.check_sites()
    z = [frac(x) for x in spec.sites]
    n = len(m.factors)
    if len(z) != n:
        raise ValueError("one site per tensor factor required")
    pair_mats = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair_mats[(i, j)] = m.matrix(casimir_pair(m, i, j))
    out = []
    for i in range(n):
        acc = SparseMatrix((m.dim, m.dim))
        for j in range(n):
            if j != i:
                acc = acc + pair_mats[(min(i, j), max(i, j))].scale(1 / (z[i] - z[j]))
        out.append(OperatorMatrix(m, acc, f"Xi_{i}"))
    return out


def diagonal_action(m: TensorModule, letter) -> OperatorMatrix:
    return OperatorMatrix(m, m.action_matrix((None, letter)), f"Delta({letter})")


# ---------------------------------------------------------------------------
# DMT


def _ratios(spec: ModelSpec, gamma) -> Dict[tuple, object]:
    alg = spec.algebra
    g = gamma.coords if isinstance(gamma, WeightVector) else tuple(frac(x) for x in gamma)
    pair = spec.shift_pairings()
    return {r: alg.root_weight_inner(r, g) / pair[r] for r in alg.positive_roots}


def dmt(spec: ModelSpec, gamma, m: GradedModule) -> OperatorMatrix:
    """T_gamma(chi) = sum_{alpha>0} (alpha,gamma)/(alpha,chi) (f_alpha e_alpha + e_alpha f_alpha)."""
    loop = _loop(m)
    ratios = _ratios(spec, gamma)
    words = []
    for r, c in ratios.items():
        if c == 0:
            continue
        e, f = loop.e(r), loop.f(r)
        words += [(c, (f, e)), (c, (e, f))]

    def fn(vec):
        out: Vector = {}
        for c, w in words:
            for k, x in m.apply_word(w, vec).items():
                _add(out, k, c * x)
        return out

    return _operator(m, fn, "T")


def affine_dmt(spec: ModelSpec, gamma, m: GradedModule, variant: str = "hat",
               level=None) -> OperatorMatrix:
    """Affine DMT operator, ``hat`` (real roots, Wick ordered) or ``tilde`` (Heisenberg-commuting)."""
    if variant not in ("hat", "tilde"):
        raise ValueError("variant must be 'hat' or 'tilde'")
    k = frac(level) if level is not None else m.highest_weight.level
    if variant == "tilde" and (k is None or k == 0):
        raise ZeroLevel("tilde variant needs a non-zero level")
    loop = _loop(m)
    ratios = _ratios(spec, gamma)

    def on_key(key) -> Vector:
        g = _key_grade(m, key)
        base = {key: Fraction(1)}
        out: Vector = {}

        def add_word(c, word):
            for k2, x in m.apply_word(word, base).items():
                _add(out, k2, c * x)

        for r, c in ratios.items():
            if c == 0:
                continue
            for n in range(0, g + 1):
                add_word(c, (loop.f(r, -n), loop.e(r, n)))
            for n in range(1, g + 1):
                add_word(c, (loop.e(r, -n), loop.f(r, n)))
            if variant == "tilde":
                for n in range(1, g + 1):
                    add_word(c, (loop.f(r, -n), loop.e(r, n)))
                for n in range(0, g + 1):
                    add_word(c, (loop.e(r, -n), loop.f(r, n)))
                for n in range(0, g + 1):
                    mult = 1 if n == 0 else 2
                    for x1, c1 in loop.coroot(r, -n).items():
                        for x2, c2 in loop.coroot(r, n).items():
                            add_word(-c * mult * c1 * c2 / k, (x1, x2))
        return out

    return _operator(m, _per_key(m, on_key), f"T_{variant}")


def heisenberg_mode(m: GradedModule, node: int, n: int) -> OperatorMatrix:
    """h_node (x) t^n restricted to the retained basis."""
    loop = _loop(m)
    return OperatorMatrix(m, m.action_matrix(loop.h(node, n)), f"h{node}[{n}]")


# ---------------------------------------------------------------------------
# Sugawara and coset


def conformal_dimension(alg: AlgebraData, nu, k):
    """(nu, nu + 2 rho) / (2 (k + h^vee))."""
    k = frac(k)
    if k + alg.dual_coxeter == 0:
        raise CriticalLevel("critical level k = -h^vee")
    nu = tuple(frac(x) for x in nu)
    two_rho = tuple(2 * x for x in alg.rho)
    return alg.weight_inner(nu, tuple(a + b for a, b in zip(nu, two_rho))) / (2 * (k + alg.dual_coxeter))


def central_charge(alg: AlgebraData, k):
    k = frac(k)
    if k + alg.dual_coxeter == 0:
        raise CriticalLevel("critical level k = -h^vee")
    return k * alg.dimension / (k + alg.dual_coxeter)


def coset_central_charge(alg: AlgebraData, k1, k2):
    return central_charge(alg, k1) + central_charge(alg, k2) - central_charge(alg, frac(k1) + frac(k2))


def _sugawara_fn(m: GradedModule, k, factor=None, grade_of=None):
    """Sugawara L_0 acting on one factor (or diagonally when factor is None on a tensor module)."""
    loop = _loop(m)
    alg = m.algebra
    k = frac(k)
    if k + alg.dual_coxeter == 0:
        raise CriticalLevel("critical level k = -h^vee")
    norm = 1 / (2 * (k + alg.dual_coxeter))
    dim = loop.real.dim
    tag = (lambda x: (factor, x)) if isinstance(m, TensorModule) else (lambda x: x)

    def on_key(key) -> Vector:
        g = grade_of(key)
        base = {key: Fraction(1)}
        out: Vector = {}
        for n in range(0, g + 1):
            mult = 1 if n == 0 else 2
            for a in range(dim):
                v = m.act(tag((n, a)), base)
                if not v:
                    continue
                for dl, c in _dual_letters(loop, a, -n).items():
                    for k2, x in m.act(tag(dl), v).items():
                        _add(out, k2, mult * c * norm * x)
        return out

    return _per_key(m, on_key)


def sugawara_l0(m: GradedModule, level=None) -> OperatorMatrix:
    k = level if level is not None else m.highest_weight.level
    if isinstance(m, TensorModule):
        fn = _sugawara_fn(m, k, None, lambda key: m.key_block(key)[0])
    else:
        fn = _sugawara_fn(m, k, None, lambda key: _key_grade(m, key))
    return _operator(m, fn, "L0")


def gko_coset(m1: GradedModule, m2: GradedModule, k1=None, k2=None,
              t: Optional[TensorModule] = None) -> OperatorMatrix:
    """L0^GKO = L0^SS (x) 1 + 1 (x) L0^SS - L0^SS(diagonal) on m1 (x) m2."""
    k1 = frac(k1 if k1 is not None else m1.highest_weight.level)
    k2 = frac(k2 if k2 is not None else m2.highest_weight.level)
    alg = m1.algebra
    for k in (k1, k2, k1 + k2):
        if k + alg.dual_coxeter == 0:
            raise CriticalLevel("critical level k = -h^vee")
    if t is None:
        t = tensor([m1, m2], min(m1.grade_cap, m2.grade_cap))
    f1 = _sugawara_fn(t, k1, 0, lambda key: m1.mono_block(key[0])[0])
    f2 = _sugawara_fn(t, k2, 1, lambda key: m2.mono_block(key[1])[0])
    fd = _sugawara_fn(t, k1 + k2, None, lambda key: t.key_block(key)[0])

    def fn(vec):
        out: Vector = {}
        for part, sgn in ((f1(vec), 1), (f2(vec), 1), (fd(vec), -1)):
            for key, x in part.items():
                _add(out, key, sgn * x)
        return out

    return _operator(t, fn, "L0_GKO")


def two_point_casimir(t: TensorModule) -> OperatorMatrix:
    """Xi = Omega^{(12)} on a two-factor tensor product (including the K/d pairing)."""
    return _operator(t, casimir_pair(t, 0, 1), "Xi")
