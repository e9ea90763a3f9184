"""Constant-coefficient homogeneous operators and their symbols.

An operator ``B = sum_{|beta| = k} B_beta d^beta`` from R^dim_v-valued maps
to R^dim_w-valued maps on R^n is stored through its exact coefficient
matrices.  Its symbol ``B(xi) = sum xi^beta B_beta`` is a ``PolyMatrix``.

Symmetric tensors (for instance the target of D^k) use the multiset-index
basis: one coordinate per exponent of total degree k in graded-lex order,
without multiplicity weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, SingularSymbolError, ZeroOperatorError
from .linalg import Matrix, nullspace, poly_det, rank
from .poly import Exponent, Poly, as_fraction, multi_indices


@dataclass(frozen=True)
class PolyMatrix:
    """dim_w x dim_v matrix of homogeneous polynomials in n variables."""

    entries: tuple[tuple[Poly, ...], ...]
    nvars: int
    degree: int

    def __post_init__(self):
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                if not p.is_homogeneous(self.degree):
                    raise ValueError(f"entry ({i + 1},{j + 1}) is not homogeneous of degree {self.degree}")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def __matmul__(self, other: PolyMatrix) -> PolyMatrix:
        rows, inner = self.shape
        if other.shape[0] != inner:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.shape[1]
        out = []
        for i in range(rows):
            row = []
            for j in range(cols):
                acc = Poly(self.nvars)
                for m in range(inner):
                    a = self.entries[i][m]
                    b = other.entries[m][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(tuple(row))
        return PolyMatrix(tuple(out), self.nvars, self.degree + other.degree)

    def transpose(self) -> PolyMatrix:
        return PolyMatrix(tuple(zip(*self.entries)), self.nvars, self.degree)

    def evaluate(self, point: Sequence) -> list[list]:
        return [[p.evaluate(point) for p in row] for row in self.entries]

    def minors(self, size: int) -> dict[tuple[int, ...], Poly]:
        """All ``size x size`` row-minors (all columns) keyed by row subset.

        Requires ``size`` equal to the number of columns.
        """
        rows, cols = self.shape
        if size != cols:
            raise ValueError("only full-column minors are supported")
        out = {}
        for subset in combinations(range(rows), size):
            out[subset] = poly_det([[self.entries[r][c] for c in range(cols)] for r in subset])
        return out


def _freeze_matrix(m, dim_w: int, dim_v: int) -> tuple[tuple[Fraction, ...], ...]:
    rows = tuple(tuple(as_fraction(x) for x in row) for row in m)
    if len(rows) != dim_w or any(len(r) != dim_v for r in rows):
        raise DimensionMismatchError(f"coefficient matrix must be {dim_w}x{dim_v}")
    return rows


@dataclass(frozen=True, eq=False)
class Operator:
    n: int
    k: int
    dim_v: int
    dim_w: int
    coeffs: Mapping[Exponent, tuple[tuple[Fraction, ...], ...]]
    name: str | None = field(default=None)

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or self.dim_v < 1 or self.dim_w < 1:
            raise ValueError("n, k, dim_v and dim_w must be positive")
        canon = {}
        for beta in multi_indices(self.n, self.k):
            if beta in self.coeffs:
                mat = _freeze_matrix(self.coeffs[beta], self.dim_w, self.dim_v)
                if any(x for row in mat for x in row):
                    canon[beta] = mat
        for beta in self.coeffs:
            if len(beta) != self.n or sum(beta) != self.k or any(b < 0 for b in beta):
                raise ValueError(f"multi-index {beta} does not have order {self.k} in {self.n} variables")
        if not canon:
            raise ZeroOperatorError("operator has no nonzero coefficient")
        object.__setattr__(self, "coeffs", canon)

    def __eq__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return (self.n, self.k, self.dim_v, self.dim_w, dict(self.coeffs)) == (
            other.n,
            other.k,
            other.dim_v,
            other.dim_w,
            dict(other.coeffs),
        )

    def __hash__(self):
        return hash((self.n, self.k, self.dim_v, self.dim_w, tuple(self.coeffs.items())))

    @classmethod
    def from_symbol(cls, symbol: PolyMatrix, name: str | None = None) -> Operator:
        rows, cols = symbol.shape
        coeffs: dict[Exponent, list[list[Fraction]]] = {}
        for i, row in enumerate(symbol.entries):
            for j, p in enumerate(row):
                for e, c in p.terms.items():
                    mat = coeffs.setdefault(e, [[Fraction(0)] * cols for _ in range(rows)])
                    mat[i][j] = c
        return cls(symbol.nvars, symbol.degree, cols, rows, coeffs, name)

    @cached_property
    def symbol(self) -> PolyMatrix:
        entries = []
        for i in range(self.dim_w):
            row = []
            for j in range(self.dim_v):
                row.append(Poly(self.n, {beta: m[i][j] for beta, m in self.coeffs.items()}))
            entries.append(tuple(row))
        return PolyMatrix(tuple(entries), self.n, self.k)

    @cached_property
    def _float_tables(self):
        betas = list(self.coeffs)
        exps = np.array(betas, dtype=int).reshape(len(betas), self.n)
        mats = np.array([[[float(x) for x in row] for row in self.coeffs[b]] for b in betas])
        return exps, mats

    def symbol_batch(self, points) -> np.ndarray:
        """Symbol at many points at once: (..., n) -> (..., dim_w, dim_v)."""
        pts = np.asarray(points)
        exps, mats = self._float_tables
        monos = np.prod(pts[..., None, :] ** exps, axis=-1)
        return np.einsum("...m,mij->...ij", monos, mats)

    def exact_symbol(self, point: Sequence) -> Matrix:
        point = [as_fraction(x) for x in point]
        return self.symbol.evaluate(point)

    @cached_property
    def full_minors(self) -> dict[tuple[int, ...], Poly]:
        """All dim_v x dim_v minors of the symbol, keyed by row subset."""
        return self.symbol.minors(self.dim_v)

    def transform_target(self, m, name: str | None = None) -> Operator:
        """The operator ``M o B`` for an exact dim_w' x dim_w matrix ``M``."""
        m = [[as_fraction(x) for x in row] for row in m]
        if any(len(row) != self.dim_w for row in m):
            raise DimensionMismatchError("target map has the wrong number of columns")
        coeffs = {
            beta: [[sum(m[i][r] * b[r][j] for r in range(self.dim_w)) for j in range(self.dim_v)] for i in range(len(m))]
            for beta, b in self.coeffs.items()
        }
        return Operator(self.n, self.k, self.dim_v, len(m), coeffs, name or self.name)

    def summary(self) -> dict:
        return {"name": self.name, "n": self.n, "k": self.k, "dim_v": self.dim_v, "dim_w": self.dim_w}


@dataclass(frozen=True)
class SymbolEval:
    point: tuple
    matrix: object  # exact list-of-lists or numpy array
    min_singular_value: float


def compose(outer: Operator, inner: Operator, name: str | None = None) -> Operator:
    """Operator whose symbol is outer(xi) @ inner(xi)."""
    if outer.n != inner.n:
        raise DimensionMismatchError(f"space dimensions differ: {outer.n} vs {inner.n}")
    if outer.dim_v != inner.dim_w:
        raise DimensionMismatchError(f"outer source dimension {outer.dim_v} != inner target dimension {inner.dim_w}")
    return Operator.from_symbol(outer.symbol @ inner.symbol, name)


def _min_sv(matrix: np.ndarray) -> float:
    return float(np.linalg.svd(matrix, compute_uv=False).min())


def symbol_at(op: Operator, point: Sequence, field: str = "real") -> SymbolEval:
    """Evaluate the symbol at one point.

    ``field`` is ``"exact"`` (rational point, Fraction matrix), ``"real"`` or
    ``"complex"`` (floating evaluation).
    """
    if len(point) != op.n:
        raise DimensionMismatchError(f"point must have {op.n} components")
    if field == "exact":
        mat = op.exact_symbol(point)
        sv = _min_sv(np.array([[float(x) for x in row] for row in mat]))
        return SymbolEval(tuple(as_fraction(x) for x in point), mat, sv)
    dtype = complex if field == "complex" else float
    pts = np.asarray(point, dtype=dtype)
    mat = op.symbol_batch(pts)
    return SymbolEval(tuple(pts.tolist()), mat, _min_sv(mat))


def pseudo_inverse_batch(op: Operator, points, rcond: float = 1e-12) -> np.ndarray:
    """[B*B]^{-1} B* at many real points: (..., n) -> (..., dim_v, dim_w)."""
    b = op.symbol_batch(np.asarray(points, dtype=float))
    u, s, vh = np.linalg.svd(b, full_matrices=False)
    smin = s[..., -1]
    bad = smin <= rcond * np.maximum(s[..., 0], np.finfo(float).tiny)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        pt = np.asarray(points)[tuple(idx)]
        raise SingularSymbolError(
            f"B*B is singular at {pt.tolist()}", float(smin[tuple(idx)]), tuple(pt.tolist())
        )
    return np.einsum("...ji,...j,...kj->...ik", vh.conj(), 1.0 / s, u.conj())


def pseudo_inverse_at(op: Operator, point: Sequence) -> np.ndarray:
    """Left inverse of the symbol at a nonzero real point."""
    pts = np.asarray(point, dtype=float)
    if not np.any(pts):
        raise SingularSymbolError("the symbol vanishes at the origin", 0.0, tuple(pts.tolist()))
    return pseudo_inverse_batch(op, pts[None, :])[0]


def exact_kernel(op: Operator, point: Sequence) -> list:
    return nullspace(op.exact_symbol(point))


def exact_rank(op: Operator, point: Sequence) -> int:
    return rank(op.exact_symbol(point))
