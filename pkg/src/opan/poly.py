"""Exact polynomial arithmetic over the rationals.

Two representations live here:

* ``Poly`` -- a sparse multivariate polynomial, a mapping from exponent
  tuples to ``Fraction`` coefficients.
* univariate polynomials as tuples of ``Fraction`` coefficients, lowest
  degree first.  These back the Sturm-sequence root counting and the
  binary-form GCD.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def multi_indices(n: int, degree: int) -> list[Exponent]:
    """All exponents of total ``degree`` in ``n`` variables, graded-lex order.

    The order puts ``x1^degree`` first, e.g. ``(2,0), (1,1), (0,2)``.
    """
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


class Poly:
    """Sparse multivariate polynomial with ``Fraction`` coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            c = as_fraction(c)
            if c:
                clean[tuple(e)] = c
        self.terms = clean

    @classmethod
    def constant(cls, nvars: int, c) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> Poly:
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def monomial(cls, exponent: Exponent, c=1) -> Poly:
        return cls(len(exponent), {tuple(exponent): c})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degrees(self) -> set[int]:
        return {sum(e) for e in self.terms}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        ds = self.degrees()
        if not ds:
            return True
        if len(ds) != 1:
            return False
        return degree is None or ds == {degree}

    def _check(self, other: Poly):
        if other.nvars != self.nvars:
            raise ValueError("polynomials live in different numbers of variables")

    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = as_fraction(other)
            return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        return self == Poly.constant(self.nvars, other)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms!r})"

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in graded-lex order (highest total degree first)."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-a for a in t[0])))

    def evaluate(self, point: Sequence):
        """Evaluate at a point of any numeric type (Fraction, float, complex)."""
        if len(point) != self.nvars:
            raise ValueError("point has the wrong dimension")
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float/complex evaluation; ``points`` has shape (..., nvars)."""
        points = np.asarray(points)
        out = np.zeros(points.shape[:-1], dtype=np.result_type(points.dtype, float))
        for e, c in self.terms.items():
            term = np.full(points.shape[:-1], float(c), dtype=out.dtype)
            for i, k in enumerate(e):
                if k:
                    term = term * points[..., i] ** k
            out = out + term
        return out


# ----------------------------------------------------------------------------
# univariate polynomials: tuples of Fractions, low degree first

UPoly = tuple


def utrim(p: Iterable) -> UPoly:
    p = [as_fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def udeg(p: UPoly) -> int:
    return len(p) - 1


def uadd(p: UPoly, q: UPoly) -> UPoly:
    n = max(len(p), len(q))
    return utrim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def uscale(p: UPoly, c) -> UPoly:
    return utrim(a * c for a in p)


def umul(p: UPoly, q: UPoly) -> UPoly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return utrim(out)


def upow(p: UPoly, k: int) -> UPoly:
    out: UPoly = (Fraction(1),)
    for _ in range(k):
        out = umul(out, p)
    return out


def ueval(p: UPoly, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def uderiv(p: UPoly) -> UPoly:
    return utrim(i * p[i] for i in range(1, len(p)))


def udivmod(p: UPoly, q: UPoly) -> tuple[UPoly, UPoly]:
    p, q = utrim(p), utrim(q)
    if not q:
        raise ZeroDivisionError("division by the zero polynomial")
    r = list(p)
    dq = udeg(q)
    lead = q[-1]
    quot = [Fraction(0)] * max(len(p) - dq, 1)
    while len(r) - 1 >= dq and any(r):
        shift = len(r) - 1 - dq
        c = r[-1] / lead
        quot[shift] = c
        for i, b in enumerate(q):
            r[i + shift] -= c * b
        r = list(utrim(r))
    return utrim(quot), utrim(r)


def umonic(p: UPoly) -> UPoly:
    if not p:
        return p
    return uscale(p, 1 / p[-1])


def ugcd(p: UPoly, q: UPoly) -> UPoly:
    """Monic GCD by the Euclidean algorithm (zero if both inputs are zero)."""
    a, b = utrim(p), utrim(q)
    while b:
        a, b = b, udivmod(a, b)[1]
    return umonic(a)


def usquarefree(p: UPoly) -> UPoly:
    g = ugcd(p, uderiv(p))
    if udeg(g) <= 0:
        return umonic(p)
    return umonic(udivmod(p, g)[0])


def sturm_sequence(p: UPoly) -> list[UPoly]:
    seq = [utrim(p), uderiv(utrim(p))]
    while seq[-1]:
        r = udivmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(uscale(r, -1))
    return [s for s in seq if s]


def _sign_changes(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _signs_at_infinity(seq: list[UPoly], positive: bool):
    out = []
    for s in seq:
        lead = s[-1]
        if not positive and udeg(s) % 2 == 1:
            lead = -lead
        out.append(lead)
    return out


def sturm_count(seq: list[UPoly], a=None, b=None) -> int:
    """Distinct real roots of ``seq[0]`` in ``(a, b]``; None means infinity.

    ``a`` must not be a root.
    """
    va = _sign_changes(_signs_at_infinity(seq, False) if a is None else [ueval(s, a) for s in seq])
    vb = _sign_changes(_signs_at_infinity(seq, True) if b is None else [ueval(s, b) for s in seq])
    return va - vb


def cauchy_bound(p: UPoly) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def isolate_real_roots(p: UPoly, width=Fraction(1, 2**40), max_splits: int = 400):
    """Isolate the distinct real roots of ``p``.

    Returns items sorted by position, each either ``("exact", t)`` for a
    rational root (hit during bisection or recovered from its isolating
    interval) or ``("interval", a, b)`` holding
    exactly one root in ``(a, b)``.  An exact hit deflates the polynomial
    and restarts the search.
    """
    p = usquarefree(utrim(p))
    found = []
    while udeg(p) > 0:
        seq = sturm_sequence(p)
        bound = cauchy_bound(p)
        stack = [(-bound, bound)]
        intervals = []
        hit = None
        splits = max_splits
        while stack and hit is None:
            a, b = stack.pop()
            count = sturm_count(seq, a, b)
            if count == 0:
                continue
            if ueval(p, b) == 0:
                hit = b
            elif count == 1 and (b - a <= width or splits <= 0):
                intervals.append((a, b))
            else:
                mid = (a + b) / 2
                if ueval(p, mid) == 0:
                    hit = mid
                else:
                    splits -= 1
                    stack.append((mid, b))
                    stack.append((a, mid))
        if hit is None:
            for a, b in intervals:
                # rational roots that bisection never lands on
                c = Fraction((a + b) / 2).limit_denominator(10**6)
                found.append(("exact", c) if a < c < b and ueval(p, c) == 0 else ("interval", a, b))
            break
        found.append(("exact", hit))
        p = umonic(udivmod(p, (-hit, Fraction(1)))[0])
    return sorted(found, key=lambda item: item[1])


# ----------------------------------------------------------------------------
# binary forms


def dehomogenize(form: Poly) -> tuple[UPoly, int]:
    """Split a binary form f(x1, x2) into (f(x, 1), power of x2 dividing f)."""
    if form.nvars != 2:
        raise ValueError("binary forms have two variables")
    if form.is_zero():
        return (), 0
    d = form.degree()
    coeffs = [Fraction(0)] * (d + 1)
    for (a, _b), c in form.terms.items():
        coeffs[a] += c
    u = utrim(coeffs)
    return u, d - udeg(u)


def homogenize(u: UPoly, x2_power: int) -> Poly:
    deg = udeg(u)
    terms = {(i, deg - i + x2_power): c for i, c in enumerate(u) if c}
    return Poly(2, terms)


def binary_form_gcd(forms: Iterable[Poly]) -> Poly:
    """GCD of binary forms, normalized to a monic dehomogenization.

    Zero forms are skipped; the GCD of no nonzero forms is the zero form.
    """
    g: UPoly | None = None
    power = None
    for f in forms:
        if f.is_zero():
            continue
        u, a = dehomogenize(f)
        g = u if g is None else ugcd(g, u)
        power = a if power is None else min(power, a)
    if g is None:
        return Poly(2)
    return homogenize(umonic(g), power)


def format_poly(p: Poly, names: Sequence[str] | None = None) -> str:
    """Human-readable rendering, e.g. ``xi1^2 + 2 xi2^2``."""
    if names is None:
        names = [f"xi{i + 1}" for i in range(p.nvars)]
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        mono = " ".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag} {mono}"
        parts.append(("-" if c < 0 else "+", body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
