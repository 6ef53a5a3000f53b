"""Bethe Ansatz equations: residuals, multistart Newton solver, Bethe vectors, eigentests."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra.lie import AlgebraData, WeightVector
from .algebra.modules import GradedModule, TensorModule, Vector, _add
from .exceptions import DegenerateConfiguration
from .hamiltonians import ModelSpec, OperatorMatrix, _loop

COLLISION = 1e-8


@dataclass
class BetheConfiguration:
    model: ModelSpec
    roots: List[Tuple[complex, int]] = field(default_factory=list)

    @property
    def positions(self) -> np.ndarray:
        return np.array([complex(w) for w, _ in self.roots], dtype=complex)

    @property
    def colors(self) -> List[int]:
        return [c for _, c in self.roots]

    def counts(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for _, c in self.roots:
            out[c] = out.get(c, 0) + 1
        return out

    def of_color(self, color: int) -> List[complex]:
        return [complex(w) for w, c in self.roots if c == color]

    def with_positions(self, w: Sequence[complex]) -> "BetheConfiguration":
        return BetheConfiguration(self.model, [(complex(x), c) for x, (_, c) in zip(w, self.roots)])

    def canonical(self) -> "BetheConfiguration":
        """Roots sorted by (color, real, imag)."""
        roots = sorted(self.roots, key=lambda r: (r[1], complex(r[0]).real, complex(r[0]).imag))
        return BetheConfiguration(self.model, roots)

    def to_json(self) -> dict:
        return {"roots": [{"w": [complex(w).real, complex(w).imag], "color": c} for w, c in self.roots]}


# ---------------------------------------------------------------------------
# model data


def sl2_affine_spec(ell, k, chi, model: str = "shift_argument_affine") -> ModelSpec:
    """Shift-of-argument sl2-affine model in the (ell, k, chi) parameterization.

    ``<alpha_1^vee, nu> = 2 ell``, level ``k``, ``<alpha_1^vee, chi> = 2 chi``.
    """
    from .sparse import frac

    ell, k, chi = frac(ell), frac(k), frac(chi)
    return ModelSpec(model, "sl2_affine", sites=[0], levels=[k],
                     shift=WeightVector((2 * chi,)), weights=[WeightVector((2 * ell,), k)])


def kdv_spec(ell, k) -> ModelSpec:
    from .sparse import frac

    return ModelSpec("kdv", "sl2_affine", sites=[0], levels=[frac(k)],
                     weights=[WeightVector((2 * frac(ell),), frac(k))])


def rational_kdv_spec() -> ModelSpec:
    return ModelSpec("rational_kdv", "sl2_affine", sites=[0], levels=[0], weights=[WeightVector((0,), 0)])


def _node_pairing(alg: AlgebraData, weight: WeightVector, node: int, level=None):
    if node == 0:
        lvl = weight.level if weight.level is not None else level
        wv = WeightVector(weight.coords, lvl if lvl is not None else 0)
        return wv.pair(alg, 0)
    return weight.pair(alg, node)


def _shift_pairing(alg: AlgebraData, chi: WeightVector, node: int):
    if node == 0:
        # chi lies in the finite Cartan: <alpha_0^vee, chi> = -<theta^vee, chi>
        return -sum(c * x for c, x in zip(alg.comarks, chi.coords))
    return chi.coords[node - 1]


def _cartan_entry(alg: AlgebraData, i: int, j: int) -> int:
    nodes = alg.nodes
    return alg.cartan_matrix[nodes.index(i)][nodes.index(j)]


class _System:
    """Residual map and Jacobian of one Bethe system with fixed colors."""

    def __init__(self, spec: ModelSpec, colors: Sequence[int], strengths: Optional[Sequence[int]] = None):
        self.spec = spec
        self.colors = list(colors)
        alg = spec.algebra
        m = len(self.colors)
        model = spec.model
        self.model = model
        self.strengths = list(strengths) if strengths is not None else [1] * m
        if model in ("shift_argument_finite", "shift_argument_affine", "regular_singularities"):
            sites = [0j] if model != "regular_singularities" else [complex(z) for z in spec.sites]
            self.sites = np.array(sites, dtype=complex)
            # scale: sl2-affine equations are printed divided by 2
            self.scale = 0.5 if (alg.is_affine and alg.rank == 1) else 1.0
            weights = spec.weights
            levels = spec.levels or [None] * len(weights)
            self.c = np.array([[complex(_node_pairing(alg, weights[i], col, levels[i] if i < len(levels) else None))
                                for i in range(len(sites))] for col in self.colors], dtype=complex).reshape(m, len(sites))
            self.A = np.array([[_cartan_entry(alg, a, b) for b in self.colors] for a in self.colors], dtype=float).reshape(m, m)
            if model != "regular_singularities":
                self.chi = np.array([complex(_shift_pairing(alg, spec.shift, col)) for col in self.colors])
            else:
                self.chi = np.zeros(m, dtype=complex)
        elif model == "kdv":
            self.ell = complex(spec.weights[0].coords[0]) / 2
            self.k = complex(spec.levels[0] if spec.levels else spec.weights[0].level)
            self.sites = np.array([0j])
        elif model == "rational_kdv":
            self.sites = np.zeros(0, dtype=complex)
        else:
            raise ValueError(f"no Bethe system for model {model!r}")

    # -- residuals -------------------------------------------------------
    def check(self, w: np.ndarray, guard: float = 0.0):
        m = len(w)
        for j in range(m):
            for s in range(j):
                if abs(w[j] - w[s]) <= guard:
                    raise DegenerateConfiguration("coincident roots")
            if self.model != "rational_kdv":
                for z in self.sites:
                    if abs(w[j] - z) <= guard:
                        raise DegenerateConfiguration("root coincides with a site")

    def residuals(self, w: np.ndarray) -> np.ndarray:
        m = len(w)
        if self.model == "kdv":
            return self._kdv(w)
        if self.model == "rational_kdv":
            return amm_residuals(w, self.strengths)
        out = np.zeros(m, dtype=complex)
        for j in range(m):
            r = np.sum(self.c[j] / (w[j] - self.sites)) + self.chi[j]
            for s in range(m):
                if s != j:
                    r -= self.A[j, s] / (w[j] - w[s])
            out[j] = self.scale * r
        return out

    def jacobian(self, w: np.ndarray) -> np.ndarray:
        m = len(w)
        if self.model == "kdv":
            return _numeric_jacobian(self._kdv, w)
        if self.model == "rational_kdv":
            return _amm_jacobian(w, self.strengths)
        J = np.zeros((m, m), dtype=complex)
        for j in range(m):
            J[j, j] = -np.sum(self.c[j] / (w[j] - self.sites) ** 2)
            for s in range(m):
                if s != j:
                    t = self.A[j, s] / (w[j] - w[s]) ** 2
                    J[j, j] += t
                    J[j, s] = -t
        return self.scale * J

    # -- site-cleared residuals (no spurious zeros at infinity) --------
    def _clearing(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.model == "kdv":
            return w ** 3, 3 * w ** 2
        if self.model == "rational_kdv" or len(self.sites) == 0:
            return np.ones_like(w), np.zeros_like(w)
        d = np.ones_like(w)
        dd = np.zeros_like(w)
        for z in self.sites:
            dd = dd * (w - z) + d
            d = d * (w - z)
        return d, dd

    def cleared(self, w: np.ndarray) -> np.ndarray:
        r = self.residuals(w)
        if self.model == "rational_kdv":
            return r
        return self._clearing(w)[0] * r

    def cleared_jacobian(self, w: np.ndarray) -> np.ndarray:
        J = self.jacobian(w)
        if self.model == "rational_kdv":
            return J
        d, dd = self._clearing(w)
        r = self.residuals(w)
        return d[:, None] * J + np.diag(dd * r)

    def _kdv(self, w: np.ndarray) -> np.ndarray:
        ell, k = self.ell, self.k
        x = k / w
        c = 1 - np.sum(x)
        L = ell * (ell + 1)
        m = len(w)
        out = np.zeros(m, dtype=complex)
        for j in range(m):
            v0 = L / w[j] ** 2 + c / w[j]
            v1 = -2 * L / w[j] ** 3 - c / w[j] ** 2
            for s in range(m):
                if s != j:
                    d = w[j] - w[s]
                    v0 += 2 / d ** 2 + x[s] / d
                    v1 += -4 / d ** 3 - x[s] / d ** 2
            out[j] = 0.25 * x[j] ** 3 - x[j] * v0 + v1
        return out


def _numeric_jacobian(f, w: np.ndarray) -> np.ndarray:
    m = len(w)
    J = np.zeros((m, m), dtype=complex)
    for s in range(m):
        h = 1e-6 * max(1.0, abs(w[s]))
        e = np.zeros(m, dtype=complex)
        e[s] = h
        J[:, s] = (f(w + e) - f(w - e)) / (2 * h)
    return J


def amm_residuals(points: Sequence[complex], strengths: Optional[Sequence[int]] = None) -> np.ndarray:
    """sum_{s != j} l_s(l_s+1)/(w_s - w_j)^(2p+1) for each j and p = 1..l_j."""
    w = np.asarray(points, dtype=complex)
    ls = [1] * len(w) if strengths is None else list(strengths)
    out = []
    for j in range(len(w)):
        for p in range(1, ls[j] + 1):
            r = 0j
            for s in range(len(w)):
                if s != j:
                    r += ls[s] * (ls[s] + 1) / (w[s] - w[j]) ** (2 * p + 1)
            out.append(r)
    return np.array(out, dtype=complex)


def _amm_jacobian(w: np.ndarray, ls: Sequence[int]) -> np.ndarray:
    rows = []
    m = len(w)
    for j in range(m):
        for p in range(1, ls[j] + 1):
            row = np.zeros(m, dtype=complex)
            for s in range(m):
                if s != j:
                    t = (2 * p + 1) * ls[s] * (ls[s] + 1) / (w[s] - w[j]) ** (2 * p + 2)
                    row[s] -= t
                    row[j] += t
            rows.append(row)
    return np.array(rows, dtype=complex).reshape(len(rows), m)


def residuals(cfg: BetheConfiguration, strengths: Optional[Sequence[int]] = None) -> np.ndarray:
    """One residual per root (per root and order for the rational KdV family)."""
    sysm = _System(cfg.model, cfg.colors, strengths)
    w = cfg.positions
    sysm.check(w)
    return sysm.residuals(w)


# ---------------------------------------------------------------------------
# solver


@dataclass
class SolveOptions:
    seeds: int = 64
    seed: int = 20240611
    tol: float = 1e-12
    max_iter: int = 200
    damping: float = 1.0
    radius: Tuple[float, float] = (0.1, 10.0)
    threads: int = 1
    normalize: Optional[bool] = None  # fix translation/scale (rational KdV)
    strengths: Optional[Sequence[int]] = None


@dataclass
class SolveReport:
    model: ModelSpec
    counts: Dict[int, int]
    solutions: List[BetheConfiguration] = field(default_factory=list)
    residual_norms: List[float] = field(default_factory=list)
    seeds_used: int = 0
    classes: List[List[int]] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)
    experiments: List[dict] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.solutions

    def to_json(self) -> dict:
        return {
            "empty": self.empty,
            "counts": {str(k): v for k, v in self.counts.items()},
            "solutions": [s.to_json() for s in self.solutions],
            "residual_norms": self.residual_norms,
            "seeds_used": self.seeds_used,
            "classes": self.classes,
            "failures": self.failures,
            "experiments": self.experiments,
        }


class EmptyReport(SolveReport):
    """A SolveReport with no convergent seed."""


def _colors_from_counts(counts: Dict[int, int]) -> List[int]:
    return [c for c in sorted(counts) for _ in range(counts[c])]


def _constraints(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """sum w = 0 and w_0 - w_1 = 1 (removes translations and scalings)."""
    m = len(w)
    rows = [np.ones(m, dtype=complex)]
    vals = [np.sum(w)]
    if m >= 2:
        r = np.zeros(m, dtype=complex)
        r[0], r[1] = 1, -1
        rows.append(r)
        vals.append(w[0] - w[1] - 1)
    return np.array(vals), np.array(rows)


def _collides(sysm: _System, w: np.ndarray) -> bool:
    try:
        sysm.check(w, COLLISION)
    except DegenerateConfiguration:
        return True
    return False


def newton(sysm: _System, w0: np.ndarray, opts: SolveOptions, normalize: bool = False):
    """Damped Newton (least squares steps, backtracking); returns (w, max|F|, reason)."""
    w = np.array(w0, dtype=complex)

    def full(x):
        f = sysm.cleared(x)
        if normalize:
            f = np.concatenate([f, _constraints(x)[0]])
        return f

    def true_res(x):
        return float(np.max(np.abs(sysm.residuals(x)))) if len(x) else 0.0

    def jac(x):
        j = sysm.cleared_jacobian(x)
        if normalize:
            j = np.vstack([j, _constraints(x)[1]])
        return j

    if _collides(sysm, w):
        return w, math.inf, "collision"
    f = full(w)
    nf = np.linalg.norm(f)
    for it in range(opts.max_iter):
        if true_res(w) < opts.tol and (not normalize or np.max(np.abs(f)) < opts.tol):
            return w, true_res(w), None
        dx = np.linalg.lstsq(jac(w), -f, rcond=None)[0]
        t = opts.damping
        while t > 1e-10:
            w2 = w + t * dx
            if not _collides(sysm, w2):
                f2 = full(w2)
                n2 = np.linalg.norm(f2)
                if np.all(np.isfinite(f2)) and n2 < (1 - 1e-4 * t) * nf:
                    break
            t *= 0.5
        else:
            if true_res(w) < opts.tol:
                return w, true_res(w), None
            return w, true_res(w), "stalled"
        w, f, nf = w2, f2, n2
        if np.max(np.abs(w)) > 1e8:
            return w, true_res(w), "diverged"
    if true_res(w) < opts.tol:
        return w, true_res(w), None
    return w, true_res(w), "max_iter"


def _seed_points(rng: np.random.Generator, center: complex, m: int, radius) -> np.ndarray:
    r1, r2 = radius
    r = np.sqrt(rng.uniform(r1 ** 2, r2 ** 2, size=m))
    th = rng.uniform(0, 2 * np.pi, size=m)
    return center + r * np.exp(1j * th)


def _same(a: BetheConfiguration, b: BetheConfiguration, tol: float = 1e-8) -> bool:
    """Equal modulo permutations of roots within each color."""
    if a.counts() != b.counts():
        return False
    for color in a.counts():
        rest = b.of_color(color)
        for w in a.of_color(color):
            d = [abs(w - x) for x in rest]
            i = int(np.argmin(d))
            if d[i] >= tol:
                return False
            rest.pop(i)
    return True


def _match(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    rest = list(b)
    for w in a:
        d = [abs(w - x) for x in rest]
        i = int(np.argmin(d))
        if d[i] >= tol:
            return False
        rest.pop(i)
    return True


def _similarity_key(w: np.ndarray) -> np.ndarray:
    """Representative of w modulo translations and complex scalings."""
    w = w - np.mean(w)
    m = len(w)
    size = max(np.max(np.abs(w)), 1e-300)
    coeffs = np.poly(w / size)
    kk = next((k for k in range(2, m + 1) if abs(coeffs[k]) ** (1 / k) > 1e-6), None)
    if kk is None:
        return w
    # scale so that the first non-vanishing symmetric function equals one; pick the
    # k-th root giving the lexicographically smallest rounded point set
    best = None
    for r in range(kk):
        s = (1 / coeffs[kk]) ** (1 / kk) * np.exp(2j * np.pi * r / kk) / size
        cand = w * s
        key = sorted((round(c.real, 6) + 0.0, round(c.imag, 6) + 0.0) for c in cand)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def solve(model: ModelSpec, counts: Dict[int, int], opts: Optional[SolveOptions] = None) -> SolveReport:
    """Multistart damped Newton for the Bethe system of ``model`` with given root counts per color."""
    opts = opts or SolveOptions()
    colors = _colors_from_counts({c: n for c, n in counts.items() if n > 0})
    m = len(colors)
    normalize = opts.normalize if opts.normalize is not None else model.model == "rational_kdv"
    sysm = _System(model, colors, opts.strengths)
    report = SolveReport(model, dict(counts))
    if m == 0:
        report.solutions.append(BetheConfiguration(model, []))
        report.residual_norms.append(0.0)
        report.classes.append([0])
        return report
    rng = np.random.default_rng(opts.seed)
    center = complex(np.mean([complex(z) for z in model.sites])) if model.sites else 0j
    seeds = [_seed_points(rng, center, m, opts.radius) for _ in range(opts.seeds)]
    report.seeds_used = len(seeds)

    def run(w0):
        return newton(sysm, w0, opts, normalize)

    if opts.threads > 1:
        with ThreadPoolExecutor(opts.threads) as ex:
            results = list(ex.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    keys: List[np.ndarray] = []
    for idx, (w, res, reason) in enumerate(results):
        if reason is not None:
            report.failures.append({"seed": idx, "reason": reason, "residual": res})
            continue
        cfg = BetheConfiguration(model, [(complex(x), c) for x, c in zip(w, colors)]).canonical()
        if normalize:
            key = _similarity_key(cfg.positions)
            match = next((i for i, k in enumerate(keys) if _match(k, key, 1e-6)), None)
        else:
            match = next((i for i, s in enumerate(report.solutions) if _same(s, cfg)), None)
        if match is None:
            report.solutions.append(cfg)
            report.residual_norms.append(res)
            report.classes.append([idx])
            if normalize:
                keys.append(key)
        else:
            report.classes[match].append(idx)
    if report.empty:
        out = EmptyReport(**report.__dict__)
        return out
    return report


def continuation(model_at, counts: Dict[int, int], start, target, steps: int = 20,
                 opts: Optional[SolveOptions] = None) -> List[BetheConfiguration]:
    """Track the solutions of ``model_at(p)`` from p = start to p = target.

    ``model_at`` maps a scalar parameter (a shift or a level) to a ModelSpec.
    """
    opts = opts or SolveOptions()
    rep = solve(model_at(start), counts, opts)
    colors = _colors_from_counts({c: n for c, n in counts.items() if n > 0})
    out = []
    for sol in rep.solutions:
        w = sol.positions
        ok = True
        for t in np.linspace(0, 1, steps + 1)[1:]:
            p = start + (target - start) * t
            sysm = _System(model_at(p), colors, opts.strengths)
            w, res, reason = newton(sysm, w, opts)
            if reason is not None:
                ok = False
                break
        if ok:
            out.append(BetheConfiguration(model_at(target), [(complex(x), c) for x, c in zip(w, colors)]))
    return out


# ---------------------------------------------------------------------------
# Bethe vectors


def _f_combo(m: GradedModule, node: int):
    return _loop(m).chevalley(node)[1]


def _apply_combo(m: GradedModule, combo, vec: Vector, factor=None) -> Vector:
    out: Vector = {}
    for letter, c in combo.items():
        lt = letter if factor is None else (factor, letter)
        for k, x in m.act(lt, vec).items():
            _add(out, k, c * x)
    return out


def _chain_sum(m: GradedModule, roots, z, hw: Vector) -> Dict[frozenset, Vector]:
    """For every subset S of roots: sum over orderings of f...f v / ((w1-w2)...(w_last - z))."""
    n = len(roots)
    memo: Dict[Tuple[int, frozenset], Vector] = {}

    def chain(j: int, rest: frozenset) -> Vector:
        key = (j, rest)
        if key in memo:
            return memo[key]
        wj, cj = roots[j]
        if not rest:
            d = wj - z
            if d == 0:
                raise DegenerateConfiguration("root coincides with a site")
            inner = {k: x / d for k, x in hw.items()}
        else:
            inner = {}
            for s in rest:
                d = wj - roots[s][0]
                if d == 0:
                    raise DegenerateConfiguration("coincident roots")
                for k, x in chain(s, rest - {s}).items():
                    _add(inner, k, x / d)
        res = _apply_combo(m, _f_combo(m, cj), inner)
        memo[key] = res
        return res

    out: Dict[frozenset, Vector] = {frozenset(): dict(hw)}
    idx = list(range(n))
    for size in range(1, n + 1):
        from itertools import combinations

        for sub in combinations(idx, size):
            s = frozenset(sub)
            acc: Vector = {}
            for j in sub:
                for k, x in chain(j, s - {j}).items():
                    _add(acc, k, x)
            out[s] = acc
    return out


def bethe_vector(cfg: BetheConfiguration, m: GradedModule) -> Vector:
    """Bethe vector of a one-module (shift of argument) or multi-site (regular singularities) configuration."""
    roots = [(complex(w), c) for w, c in cfg.roots]
    if isinstance(m, TensorModule):
        z = [complex(x) for x in cfg.model.sites]
        n = len(m.factors)
        per = [_chain_sum(f, roots, z[k], f.highest_vector()) for k, f in enumerate(m.factors)]
        out: Vector = {}
        for assign in product(range(n), repeat=len(roots)):
            parts = []
            for k in range(n):
                parts.append(per[k][frozenset(j for j, a in enumerate(assign) if a == k)])
            # ordered partitions: each factor's ordering summed inside per[k]
            for combo in product(*[list(p.items()) for p in parts]):
                key = tuple(kv[0] for kv in combo)
                val = 1
                for kv in combo:
                    val = val * kv[1]
                _add(out, key, val)
        return out
    table = _chain_sum(m, roots, 0, m.highest_vector())
    return table[frozenset(range(len(roots)))]


# ---------------------------------------------------------------------------
# eigentests


@dataclass
class EigenRecord:
    name: str
    eigenvalue: complex
    residual: float

    def to_json(self) -> dict:
        return {"operator": self.name, "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
                "residual": self.residual}


@dataclass
class EigenReport:
    records: List[EigenRecord]
    heisenberg_annihilates: Optional[bool] = None
    heisenberg_residual: Optional[float] = None

    def passed(self, tol: float) -> bool:
        return all(r.residual < tol for r in self.records)

    def to_json(self) -> dict:
        return {"records": [r.to_json() for r in self.records],
                "heisenberg_annihilates": self.heisenberg_annihilates,
                "heisenberg_residual": self.heisenberg_residual}


def eigentest(vec: Vector, ops: Sequence[OperatorMatrix], tol: float = 1e-10,
              module: Optional[GradedModule] = None) -> EigenReport:
    """Least-squares eigenvalue and relative residual of ``vec`` for each operator."""
    if not vec:
        raise ValueError("zero vector")
    m = module or (ops[0].module if ops else None)
    v = m.to_dense(vec)
    nv = np.linalg.norm(v)
    records = []
    for op in ops:
        ov = op.matrix.to_dense() @ v if op.matrix.nnz else np.zeros_like(v)
        lam = np.vdot(v, ov) / np.vdot(v, v)
        records.append(EigenRecord(op.name, complex(lam), float(np.linalg.norm(ov - lam * v) / nv)))
    rep = EigenReport(records)
    if m is not None and m.algebra.is_affine and not isinstance(m, TensorModule):
        loop = _loop(m)
        g = max((m.block_of(k)[0] for k in vec), default=0)
        worst = 0.0
        for node in range(1, m.algebra.rank + 1):
            for n in range(1, g + 1):
                hv = m.act(loop.h(node, n), vec)
                if hv:
                    worst = max(worst, max(abs(complex(x)) for x in hv.values()) / max(abs(complex(x)) for x in vec.values()))
        rep.heisenberg_residual = worst
        rep.heisenberg_annihilates = worst < tol
    return rep
