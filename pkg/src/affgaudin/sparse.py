"""Small exact sparse matrix type.

Entries may be ``int``, ``Fraction`` or ``complex``; arithmetic never
converts to floating point on its own, so identities between operators
built from rational structure constants can be checked exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np


def _is_zero(x) -> bool:
    return x == 0


class SparseMatrix:
    """Row-major dict-of-dicts matrix."""

    __slots__ = ("shape", "rows")

    def __init__(self, shape: Tuple[int, int], rows: Dict[int, Dict[int, object]] | None = None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.rows: Dict[int, Dict[int, object]] = {}
        if rows:
            for i, row in rows.items():
                clean = {j: v for j, v in row.items() if not _is_zero(v)}
                if clean:
                    self.rows[i] = clean

    # construction -----------------------------------------------------------
    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "SparseMatrix":
        return cls((n, n if m is None else m))

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls((n, n), {i: {i: 1} for i in range(n)})

    @classmethod
    def from_columns(cls, shape, columns: Dict[int, Dict[int, object]]) -> "SparseMatrix":
        rows: Dict[int, Dict[int, object]] = {}
        for j, col in columns.items():
            for i, v in col.items():
                if not _is_zero(v):
                    rows.setdefault(i, {})[j] = v
        out = cls(shape)
        out.rows = rows
        return out

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a)
        rows = {}
        for i in range(a.shape[0]):
            r = {j: a[i, j].item() if hasattr(a[i, j], "item") else a[i, j]
                 for j in range(a.shape[1]) if a[i, j] != 0}
            if r:
                rows[i] = r
        return cls(a.shape, rows)

    # access -----------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows.get(i, {}).get(j, 0)

    def items(self) -> Iterator[Tuple[int, int, object]]:
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def column(self, j: int) -> Dict[int, object]:
        return {i: row[j] for i, row in self.rows.items() if j in row}

    # arithmetic -------------------------------------------------------------
    def _check_same(self, other: "SparseMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_same(other)
        rows = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            tgt = rows.setdefault(i, {})
            for j, v in r.items():
                tgt[j] = tgt.get(j, 0) + v
        return SparseMatrix(self.shape, rows)

    def __neg__(self) -> "SparseMatrix":
        return SparseMatrix(self.shape, {i: {j: -v for j, v in r.items()} for i, r in self.rows.items()})

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def scale(self, c) -> "SparseMatrix":
        if _is_zero(c):
            return SparseMatrix(self.shape)
        return SparseMatrix(self.shape, {i: {j: c * v for j, v in r.items()} for i, r in self.rows.items()})

    def __mul__(self, c) -> "SparseMatrix":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        rows = {}
        orows = other.rows
        for i, r in self.rows.items():
            acc: Dict[int, object] = {}
            for k, a in r.items():
                ok = orows.get(k)
                if not ok:
                    continue
                for j, b in ok.items():
                    acc[j] = acc.get(j, 0) + a * b
            if acc:
                rows[i] = acc
        return SparseMatrix((self.shape[0], other.shape[1]), rows)

    def apply(self, vec: Dict[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        for i, r in self.rows.items():
            s = 0
            for j, a in r.items():
                b = vec.get(j)
                if b is not None:
                    s += a * b
            if not _is_zero(s):
                out[i] = s
        return out

    def commutator(self, other: "SparseMatrix") -> "SparseMatrix":
        return self @ other - other @ self

    def transpose(self) -> "SparseMatrix":
        rows: Dict[int, Dict[int, object]] = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                rows.setdefault(j, {})[i] = v
        out = SparseMatrix((self.shape[1], self.shape[0]))
        out.rows = rows
        return out

    def submatrix(self, idx: Iterable[int]) -> "SparseMatrix":
        idx = list(idx)
        pos = {g: k for k, g in enumerate(idx)}
        rows = {}
        for g in idx:
            r = self.rows.get(g)
            if not r:
                continue
            sub = {pos[j]: v for j, v in r.items() if j in pos}
            if sub:
                rows[pos[g]] = sub
        return SparseMatrix((len(idx), len(idx)), rows)

    # predicates -------------------------------------------------------------
    def is_zero(self) -> bool:
        """Exact test: every stored entry compares equal to zero."""
        return all(_is_zero(v) for r in self.rows.values() for v in r.values())

    def max_abs(self) -> float:
        return max((abs(complex(v)) for r in self.rows.values() for v in r.values()), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for r in self.rows.values() for v in r.values())

    # conversion -------------------------------------------------------------
    def to_dense(self, dtype=complex) -> np.ndarray:
        a = np.zeros(self.shape, dtype=dtype)
        for i, r in self.rows.items():
            for j, v in r.items():
                a[i, j] = complex(v) if dtype is complex else v
        return a

    def to_coo(self):
        """(row, col, value) triples in row-major order."""
        return list(self.items())

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def frac(x) -> Fraction | complex:
    """Coerce ints/strings/Fractions to Fraction; leave floats and complex alone."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return x
