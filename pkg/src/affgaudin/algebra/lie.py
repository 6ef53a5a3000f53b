"""Cartan and root data for simple and untwisted affine Lie algebras.

Roots are stored as integer tuples in the basis of finite simple roots
``alpha_1 .. alpha_l``; weights as Dynkin labels (coordinates in the
fundamental weights).  Affine roots carry an extra ``delta`` coefficient.
Dynkin nodes are labelled ``1..l`` for the finite algebra and ``0..l``
for its affine extension, node ``0`` being ``delta - theta``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import UnsupportedAlgebra
from ..sparse import frac

Root = Tuple[int, ...]


def _inverse(mat: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _positive_roots(cartan: Tuple[Tuple[int, ...], ...]) -> Tuple[Root, ...]:
    """All positive roots of a finite root system, via root strings."""
    n = len(cartan)
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    roots = set(simple)
    layer = list(simple)
    while layer:
        nxt = []
        for beta in layer:
            # <alpha_i^vee, beta> = sum_j A_ij c_j
            for i in range(n):
                pairing = sum(cartan[i][j] * beta[j] for j in range(n))
                p = 0
                lower = list(beta)
                while True:
                    lower[i] -= 1
                    if tuple(lower) in roots:
                        p += 1
                    else:
                        break
                q = p - pairing
                if q > 0:
                    up = list(beta)
                    up[i] += 1
                    up = tuple(up)
                    if up not in roots:
                        roots.add(up)
                        nxt.append(up)
        layer = nxt
    return tuple(sorted(roots, key=lambda r: (sum(r), tuple(-x for x in r))))


_FINITE_TABLE = {
    # type: (exponents fn, dual coxeter fn, coxeter fn)
    "A": (lambda l: tuple(range(1, l + 1)), lambda l: l + 1, lambda l: l + 1),
    "B": (lambda l: tuple(range(1, 2 * l, 2)), lambda l: 2 * l - 1, lambda l: 2 * l),
    "C": (lambda l: tuple(range(1, 2 * l, 2)), lambda l: l + 1, lambda l: 2 * l),
}


def _cartan_matrix(series: str, rank: int) -> Tuple[Tuple[int, ...], ...]:
    a = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        a[i][i] = 2
        if i + 1 < rank:
            a[i][i + 1] = a[i + 1][i] = -1
    if series == "B" and rank >= 2:
        # alpha_l short
        a[rank - 1][rank - 2] = -2
    elif series == "C" and rank >= 2:
        # alpha_l long
        a[rank - 2][rank - 1] = -2
    return tuple(tuple(r) for r in a)


@dataclass(frozen=True)
class AlgebraData:
    """Cartan data of a finite simple or untwisted affine Lie algebra."""

    name: str
    kind: str  # "finite" | "affine"
    series: str
    rank: int
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    finite_cartan: Tuple[Tuple[int, ...], ...]
    positive_roots: Tuple[Root, ...]
    exponents: Tuple[int, ...]
    dual_coxeter: int
    coxeter_number: int
    symmetrizer: Tuple[Fraction, ...]  # (alpha_i, alpha_i)/2, long roots -> 1
    dual_of: Optional[str] = field(default=None, compare=False)

    # -- derived data -----------------------------------------------------
    @property
    def is_affine(self) -> bool:
        return self.kind == "affine"

    @cached_property
    def inner_product(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """(alpha_i, alpha_j) on finite simple roots; long roots have length 2."""
        d = self.symmetrizer
        a = self.finite_cartan
        return tuple(tuple(d[i] * a[i][j] for j in range(self.rank)) for i in range(self.rank))

    @cached_property
    def fundamental_gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        inv = _inverse(self.finite_cartan)
        d = self.symmetrizer
        return tuple(tuple(inv[k][i] * d[k] for k in range(self.rank)) for i in range(self.rank))

    @cached_property
    def highest_root(self) -> Root:
        return max(self.positive_roots, key=lambda r: (sum(r), r))

    @cached_property
    def marks(self) -> Root:
        """theta = sum a_i alpha_i."""
        return self.highest_root

    @cached_property
    def comarks(self) -> Tuple[Fraction, ...]:
        """theta^vee = sum a_i^vee alpha_i^vee."""
        # theta^vee = 2 theta/(theta,theta); alpha_i^vee = alpha_i / d_i
        th = self.highest_root
        return tuple(Fraction(th[i]) * self.symmetrizer[i] for i in range(self.rank))

    @property
    def simple_roots(self) -> Tuple[Tuple, ...]:
        """Simple roots in Dynkin-label coordinates (affine: with delta part)."""
        cols = tuple(tuple(self.finite_cartan[j][i] for j in range(self.rank)) for i in range(self.rank))
        if not self.is_affine:
            return cols
        theta = self.root_to_weight(self.highest_root)
        a0 = (tuple(-x for x in theta), 1)
        return (a0,) + tuple((c, 0) for c in cols)

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(range(0 if self.is_affine else 1, self.rank + 1))

    def root_to_weight(self, root: Root) -> Tuple[Fraction, ...]:
        a = self.finite_cartan
        return tuple(Fraction(sum(a[i][j] * root[j] for j in range(self.rank))) for i in range(self.rank))

    def root_inner(self, r1: Root, r2: Root) -> Fraction:
        b = self.inner_product
        return sum((r1[i] * b[i][j] * r2[j] for i in range(self.rank) for j in range(self.rank)), Fraction(0))

    def root_weight_inner(self, root: Root, weight: Sequence) -> object:
        """(alpha, gamma) for a root in simple-root coordinates and a weight in Dynkin labels."""
        d = self.symmetrizer
        return sum(root[j] * d[j] * weight[j] for j in range(self.rank))

    def weight_inner(self, w1: Sequence, w2: Sequence) -> object:
        f = self.fundamental_gram
        return sum(w1[i] * f[i][j] * w2[j] for i in range(self.rank) for j in range(self.rank))

    def node_root(self, i: int) -> Tuple[Root, int]:
        """Simple root of node i as (finite part in simple-root coords, delta coefficient)."""
        if i == 0:
            if not self.is_affine:
                raise UnsupportedAlgebra(f"{self.name} has no affine node 0")
            return tuple(-x for x in self.highest_root), 1
        return tuple(int(j == i - 1) for j in range(self.rank)), 0

    def affine_positive_real_roots(self, max_delta: int) -> List[Tuple[Root, int]]:
        """Positive real roots alpha + n delta with n <= max_delta."""
        out = [(r, 0) for r in self.positive_roots]
        for n in range(1, max_delta + 1):
            out += [(r, n) for r in self.positive_roots]
            out += [(tuple(-x for x in r), n) for r in self.positive_roots]
        return out

    @property
    def rho(self) -> Tuple[int, ...]:
        return (1,) * self.rank

    @property
    def dimension(self) -> int:
        return self.rank + 2 * len(self.positive_roots)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "series": self.series,
            "rank": self.rank,
            "cartan_matrix": [list(r) for r in self.cartan_matrix],
            "positive_roots": [list(r) for r in self.positive_roots],
            "exponents": list(self.exponents),
            "dual_coxeter": self.dual_coxeter,
            "coxeter_number": self.coxeter_number,
            "inner_product": [[str(x) for x in r] for r in self.inner_product],
        }


_NAME_RE = re.compile(r"^(?:(sl)(\d+)|([ABC])(\d+)|(so5)|(sp4))(_affine)?$")


def build_algebra(name: str) -> AlgebraData:
    """Cartan data for ``sl2``, ``sl3``, ..., ``sl2_affine``, ``sl3_affine``, ``B2``, ``C2``."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise UnsupportedAlgebra(f"unknown algebra {name!r}")
    affine = bool(m.group(7))
    if m.group(1):
        n = int(m.group(2))
        series, rank = "A", n - 1
    elif m.group(3):
        series, rank = m.group(3), int(m.group(4))
    elif m.group(5):
        series, rank = "B", 2
    else:
        series, rank = "C", 2
    if rank < 1 or (series in "BC" and rank < 2):
        raise UnsupportedAlgebra(f"unknown algebra {name!r}")
    if affine and series != "A":
        raise UnsupportedAlgebra("only untwisted affine algebras of type A are supported")
    return _make(series, rank, affine, name)


def _make(series: str, rank: int, affine: bool, name: str) -> AlgebraData:
    fin = _cartan_matrix(series, rank)
    roots = _positive_roots(fin)
    exps, hdual, cox = (f(rank) for f in _FINITE_TABLE[series])
    if series == "A":
        sym = (Fraction(1),) * rank
    elif series == "B":
        sym = (Fraction(1),) * (rank - 1) + (Fraction(1, 2),)
    else:
        sym = (Fraction(1, 2),) * (rank - 1) + (Fraction(1),)
    cartan = fin
    if affine:
        theta = max(roots, key=lambda r: (sum(r), r))
        # <alpha_0^vee, alpha_j> = -<theta^vee, alpha_j>; <alpha_i^vee, alpha_0> = -<alpha_i^vee, theta>
        theta_w = [sum(fin[i][j] * theta[j] for j in range(rank)) for i in range(rank)]
        row0 = [2] + [-int(theta_w[j]) for j in range(rank)]
        rows = [row0] + [[-int(theta_w[i])] + list(fin[i]) for i in range(rank)]
        cartan = tuple(tuple(r) for r in rows)
    return AlgebraData(
        name=name, kind="affine" if affine else "finite", series=series, rank=rank,
        cartan_matrix=cartan, finite_cartan=fin, positive_roots=roots,
        exponents=exps, dual_coxeter=hdual, coxeter_number=cox, symmetrizer=sym,
    )


def langlands_dual(a: AlgebraData) -> AlgebraData:
    """Algebra with transposed Cartan matrix (B_n <-> C_n, type A self-dual)."""
    if a.series == "A":
        return a
    other = {"B": "C", "C": "B"}[a.series]
    dual = _make(other, a.rank, a.is_affine, f"{other}{a.rank}")
    assert dual.cartan_matrix == tuple(zip(*a.cartan_matrix))
    return dual


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightVector:
    """Weight in Dynkin labels; ``level``/``degree`` are the K and d components."""

    coords: Tuple
    level: object = None
    degree: object = None

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(frac(c) for c in self.coords))
        if self.level is not None:
            object.__setattr__(self, "level", frac(self.level))
        if self.degree is not None:
            object.__setattr__(self, "degree", frac(self.degree))

    def pair(self, alg: AlgebraData, node: int):
        """<alpha_node^vee, self>, exact when coordinates are rational."""
        if node == 0:
            if self.level is None:
                raise ValueError("affine node pairing needs a level")
            return self.level - sum(c * x for c, x in zip(alg.comarks, self.coords))
        return self.coords[node - 1]

    def is_dominant_integral(self, alg: AlgebraData) -> bool:
        vals = [self.pair(alg, i) for i in alg.nodes]
        return all(isinstance(v, (int, Fraction)) and v == int(v) and v >= 0 for v in vals)

    def to_json(self) -> dict:
        return {
            "coords": [str(c) for c in self.coords],
            "level": None if self.level is None else str(self.level),
            "degree": None if self.degree is None else str(self.degree),
        }


# ---------------------------------------------------------------------------
# matrix realization of sl_n


class SlnRealization:
    """Chevalley basis of sl_n as integer matrices with trace-form pairing.

    Basis order: ``f_alpha`` for positive roots (in ``positive_roots`` order),
    then the coroots ``h_1..h_l``, then ``e_alpha``.
    """

    def __init__(self, alg: AlgebraData):
        if alg.series != "A":
            raise UnsupportedAlgebra(f"no matrix realization for {alg.name}")
        self.alg = alg
        n = alg.rank + 1
        self.n = n
        self.roots = alg.positive_roots
        # positive root of type A: alpha_i + ... + alpha_{j-1}  <->  E_{i,j}
        self.root_ij = {}
        for r in self.roots:
            nz = [k for k, c in enumerate(r) if c]
            self.root_ij[r] = (nz[0], nz[-1] + 1)
        names, mats, roots_of = [], [], []
        for r in self.roots:
            i, j = self.root_ij[r]
            names.append(f"f{i+1}{j+1}")
            mats.append(self._unit(j, i))
            roots_of.append(tuple(-c for c in r))
        for k in range(alg.rank):
            m = np.zeros((n, n), dtype=np.int64)
            m[k, k], m[k + 1, k + 1] = 1, -1
            names.append(f"h{k+1}")
            mats.append(m)
            roots_of.append((0,) * alg.rank)
        for r in self.roots:
            i, j = self.root_ij[r]
            names.append(f"e{i+1}{j+1}")
            mats.append(self._unit(i, j))
            roots_of.append(tuple(r))
        self.names = names
        self.mats = mats
        self.root_of = roots_of
        self.dim = len(mats)
        p = len(self.roots)
        self.f_index = {r: k for k, r in enumerate(self.roots)}
        self.h_index = {k + 1: p + k for k in range(alg.rank)}
        self.e_index = {r: p + alg.rank + k for k, r in enumerate(self.roots)}
        self._brackets = {}
        self._kappa = np.array([[int(np.trace(a @ b)) for b in mats] for a in mats], dtype=object)
        inv = _inverse(self._kappa.tolist())
        # dual basis J^a = sum_b inv[b][a] J_b  so that kappa(J_a, J^b) = delta
        self.dual = [{b: inv[b][a] for b in range(self.dim) if inv[b][a] != 0} for a in range(self.dim)]

    def _unit(self, i, j):
        m = np.zeros((self.n, self.n), dtype=np.int64)
        m[i, j] = 1
        return m

    def is_cartan(self, a: int) -> bool:
        return not any(self.root_of[a])

    def decompose(self, m: np.ndarray) -> Dict[int, Fraction]:
        out = {}
        for r in self.roots:
            i, j = self.root_ij[r]
            if m[i, j]:
                out[self.e_index[r]] = Fraction(int(m[i, j]))
            if m[j, i]:
                out[self.f_index[r]] = Fraction(int(m[j, i]))
        acc = 0
        for k in range(self.alg.rank):
            acc += int(m[k, k])
            if acc:
                out[self.h_index[k + 1]] = Fraction(acc)
        return out

    def bracket(self, a: int, b: int) -> Dict[int, Fraction]:
        key = (a, b)
        if key not in self._brackets:
            m = self.mats[a] @ self.mats[b] - self.mats[b] @ self.mats[a]
            self._brackets[key] = self.decompose(m)
        return self._brackets[key]

    def kappa(self, a: int, b: int) -> int:
        return self._kappa[a][b]

    def coroot(self, root: Root) -> Dict[int, Fraction]:
        """h_alpha (identified with alpha by the normalized form) in the coroot basis."""
        i, j = self.root_ij[root]
        return {self.h_index[k + 1]: Fraction(1) for k in range(i, j)}

    def cartan_value(self, a: int, weight: Sequence) -> object:
        """Eigenvalue of Cartan basis element ``a`` on a vector of the given Dynkin weight."""
        for node, idx in self.h_index.items():
            if idx == a:
                return weight[node - 1]
        raise ValueError(f"basis element {self.names[a]} is not in the Cartan subalgebra")
