from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opan.linalg import canonical_basis, contains, det, intersect, nullspace, poly_det, rank, same_span
from opan.poly import (
    Poly,
    binary_form_gcd,
    dehomogenize,
    format_poly,
    homogenize,
    isolate_real_roots,
    multi_indices,
    sturm_count,
    sturm_sequence,
    udivmod,
    ueval,
    ugcd,
    umul,
    usquarefree,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_multi_indices_graded_lex():
    assert multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert len(multi_indices(3, 3)) == 10


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=5, unique=True))
def test_sturm_counts_distinct_integer_roots(roots):
    p = (Fraction(1),)
    for r in roots:
        p = umul(p, (Fraction(-r), Fraction(1)))
    p = umul(p, (Fraction(1), Fraction(0), Fraction(1)))  # x^2 + 1 adds no real roots
    assert sturm_count(sturm_sequence(p)) == len(roots)
    found = isolate_real_roots(p)
    assert len(found) == len(roots)
    for item, r in zip(found, sorted(roots)):
        assert item == ("exact", r)


def test_isolation_of_irrational_roots_matches_numpy():
    p = (Fraction(-2), Fraction(0), Fraction(0), Fraction(1))  # x^3 - 2
    (item,) = isolate_real_roots(p)
    assert item[0] == "interval"
    assert item[1] < 2 ** (1 / 3) < item[2]
    p = (Fraction(1), Fraction(-5), Fraction(0), Fraction(1))  # x^3 - 5x + 1
    ref = np.sort(np.roots([1, 0, -5, 1]).real)
    items = isolate_real_roots(p)
    assert len(items) == 3
    for item, r in zip(items, ref):
        assert item[1] < r < item[2]


@given(st.lists(small, min_size=1, max_size=4), st.lists(small, min_size=1, max_size=4))
def test_division_identity(a, b):
    if not any(b):
        with pytest.raises(ZeroDivisionError):
            udivmod(tuple(a), tuple(b))
        return
    q, r = udivmod(tuple(a), tuple(b))
    x = Fraction(3, 7)
    assert ueval(a, x) == ueval(q, x) * ueval(b, x) + ueval(r, x)


def test_gcd_and_squarefree():
    p = umul((Fraction(-1), Fraction(1)), (Fraction(-1), Fraction(1)))  # (x-1)^2
    assert usquarefree(p) == (Fraction(-1), Fraction(1))
    assert ugcd(p, (Fraction(-1), Fraction(0), Fraction(1))) == (Fraction(-1), Fraction(1))


def test_binary_form_gcd_common_complex_factor():
    x1, x2 = Poly.variable(2, 0), Poly.variable(2, 1)
    q = x1 * x1 + x2 * x2
    g = binary_form_gcd([q * x1, q * (x1 - 2 * x2), Poly(2)])
    assert g == q
    assert format_poly(g) == "xi1^2 + xi2^2"
    assert binary_form_gcd([x1, x2]) == Poly.constant(2, 1)


def test_dehomogenize_roundtrip():
    x1, x2 = Poly.variable(2, 0), Poly.variable(2, 1)
    f = (x1 - 3 * x2) * x2 * x2
    u, power = dehomogenize(f)
    assert power == 2
    assert homogenize(u, power) == f


@given(st.integers(0, 3), st.integers(0, 3), small)
def test_poly_evaluation_homogeneous(a, b, t):
    p = Poly.monomial((a, b), 2) + Poly.monomial((b, a), -1)
    pt = (Fraction(2, 3), Fraction(-1, 5))
    scaled = (t * pt[0], t * pt[1])
    assert p.evaluate(scaled) == t ** (a + b) * p.evaluate(pt)


# exact linear algebra


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_nullity(rows):
    ns = nullspace(rows, 3)
    assert rank(rows) + len(ns) == 3
    for v in ns:
        assert all(sum(r[j] * v[j] for j in range(3)) == 0 for r in rows)


def test_det_and_poly_det():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    assert det(m) == 5
    x1, x2 = Poly.variable(2, 0), Poly.variable(2, 1)
    assert poly_det([[x1, -x2], [x2, x1]]) == x1 * x1 + x2 * x2


def test_intersection_and_span():
    e = [(Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0))]
    f = [(Fraction(0), Fraction(1), Fraction(0)), (Fraction(0), Fraction(0), Fraction(1))]
    inter = intersect(e, f, 3)
    assert same_span(inter, [(0, 1, 0)])
    assert contains(e, (Fraction(3), Fraction(-2), Fraction(0)))
    assert not contains(e, (0, 0, 1))
    assert canonical_basis([(2, 4, 0), (1, 2, 0)]) == canonical_basis([(1, 2, 0)])


def test_poly_rejects_floats():
    with pytest.raises(TypeError):
        Poly.constant(1, 0.5)
