"""Exact linear algebra on lists of ``Fraction`` rows."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Poly, as_fraction

Matrix = list[list[Fraction]]
Vector = tuple[Fraction, ...]


def to_matrix(rows) -> Matrix:
    return [[as_fraction(x) for x in row] for row in rows]


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*m)] if m else []


def rref(m: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [list(row) for row in m]
    if not a:
        return a, []
    rows, cols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m) -> int:
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence[Fraction]], ncols: int | None = None) -> list[Vector]:
    """Basis of {x : m x = 0}."""
    if not m:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    r, pivots = rref(m)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -r[i][f]
        basis.append(tuple(v))
    return basis


def column_space(m: Sequence[Sequence[Fraction]]) -> list[Vector]:
    """Pivot columns of ``m``: a basis of its image."""
    _, pivots = rref(m)
    return [tuple(row[c] for row in m) for c in pivots]


def canonical_basis(vectors: Sequence[Sequence[Fraction]]) -> list[Vector]:
    """RREF rows of the spanning set: a canonical basis of the span."""
    if not vectors:
        return []
    r, pivots = rref(vectors)
    return [tuple(r[i]) for i in range(len(pivots))]


def intersect(a: Sequence[Vector], b: Sequence[Vector], dim: int) -> list[Vector]:
    """Canonical basis of span(a) ∩ span(b) in Q^dim."""
    if not a or not b:
        return []
    # columns of [A | -B]; kernel vectors (s, t) give A s = B t
    m = [[a[j][i] for j in range(len(a))] + [-b[j][i] for j in range(len(b))] for i in range(dim)]
    kern = nullspace(m)
    vecs = []
    for k in kern:
        s = k[: len(a)]
        vecs.append(tuple(sum(s[j] * a[j][i] for j in range(len(a))) for i in range(dim)))
    return canonical_basis(vecs)


def contains(basis: Sequence[Vector], w: Sequence[Fraction]) -> bool:
    if not any(w):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(w)]) == rank(list(basis))


def same_span(a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    return canonical_basis(a) == canonical_basis(b)


def matvec(m, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def matmul(a, b):
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [list(row) for row in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            out = -out
        out *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return out


def poly_det(m: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square matrix of polynomials (Laplace, memoized on columns)."""
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    nvars = m[0][0].nvars
    memo: dict[tuple[int, ...], Poly] = {}

    def rec(row: int, cols: tuple[int, ...]) -> Poly:
        if row == n:
            return Poly.constant(nvars, 1)
        if cols in memo:
            return memo[cols]
        total = Poly(nvars)
        for idx, c in enumerate(cols):
            entry = m[row][c]
            if entry.is_zero():
                continue
            sub = rec(row + 1, cols[:idx] + cols[idx + 1 :])
            term = entry * sub
            total = total - term if idx % 2 else total + term
        memo[cols] = total
        return total

    return rec(0, tuple(range(n)))
