"""Gaussian elimination over exact scalars (Fraction, or complex with a tolerance)."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence, Tuple

_TOL = 1e-11


def _nonzero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x != 0
    return abs(x) > _TOL


def row_reduce(mat: Sequence[Sequence]) -> Tuple[List[List], List[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [list(r) for r in mat]
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        best = None
        for i in range(r, nrows):
            if _nonzero(a[i][c]):
                if isinstance(a[i][c], (int, Fraction)):
                    best = i
                    break
                if best is None or abs(a[i][c]) > abs(a[best][c]):
                    best = i
        if best is None:
            continue
        a[r], a[best] = a[best], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(nrows):
            if i != r and _nonzero(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat) -> int:
    return len(row_reduce(mat)[1])


def pivot_columns(mat) -> List[int]:
    return row_reduce(mat)[1]


def solve(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List]:
    """Solve A X = B for square nonsingular A."""
    n = len(a)
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [row[n:] for row in red[:n]]


def determinant(mat: Sequence[Sequence]):
    a = [list(r) for r in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if _nonzero(a[i][c])), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            if _nonzero(a[i][c]):
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det
