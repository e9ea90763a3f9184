from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opan import gallery
from opan.errors import DimensionMismatchError, SingularSymbolError, ZeroOperatorError
from opan.operator import Operator, compose, exact_rank, pseudo_inverse_at, pseudo_inverse_batch, symbol_at
from opan.classify import sphere_points

from strategies import operators, rational_points

ELLIPTIC = ["grad_n2", "dn_n1", "dn_n2", "dn_n3", "laplace_n2", "div_curl_n2", "div_curl_n3", "lap_div_curl_n3", "example_ab", "example_aa", "bitsadze_n2"]


@pytest.mark.parametrize("name", [e.id for e in gallery.gallery()])
def test_symbol_homogeneity_on_rational_samples(name):
    op = gallery.get(name)
    rng = np.random.default_rng(7)
    for _ in range(1000):
        xi = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, op.n), rng.integers(1, 8, op.n))]
        t = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
        lhs = op.exact_symbol([t * x for x in xi])
        rhs = op.exact_symbol(xi)
        assert all(lhs[i][j] == t**op.k * rhs[i][j] for i in range(op.dim_w) for j in range(op.dim_v))


@given(operators(n=2, k=1, dim_v=2, dim_w=2), operators(n=2, k=1, dim_v=2, dim_w=2), operators(n=2, k=1, dim_v=2, dim_w=2))
@settings(max_examples=25)
def test_compose_is_associative(a, b, c):
    try:
        left = compose(compose(a, b), c)
    except ZeroOperatorError:
        return
    right = compose(a, compose(b, c))
    assert left == right


@given(operators(), st.data())
def test_float_symbol_matches_exact(op, data):
    xi = data.draw(rational_points(op.n))
    exact = np.array([[float(x) for x in row] for row in op.exact_symbol(xi)])
    assert np.allclose(op.symbol_batch(np.array([float(x) for x in xi])), exact, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", ELLIPTIC)
def test_pseudo_inverse_is_left_inverse(name):
    op = gallery.get(name)
    pts = sphere_points(op.n, 1000, seed=3) if op.n > 1 else np.array([[1.0], [-1.0]])
    pinv = pseudo_inverse_batch(op, pts)
    prod = pinv @ op.symbol_batch(pts)
    assert np.abs(prod - np.eye(op.dim_v)).max() < 1e-12


def test_pseudo_inverse_raises_on_singular_symbol():
    op = gallery.get("mixed_partials_n2")
    with pytest.raises(SingularSymbolError) as info:
        pseudo_inverse_at(op, (1.0, 0.0))
    assert info.value.min_singular_value < 1e-12


def test_compose_dimension_check():
    with pytest.raises(DimensionMismatchError):
        compose(gallery.get("grad_n2"), gallery.get("grad_n2"))


def test_zero_operator_rejected():
    with pytest.raises(ZeroOperatorError):
        Operator(2, 1, 1, 1, {(1, 0): [[0]]})


def test_wrong_order_rejected():
    with pytest.raises(ValueError):
        Operator(2, 1, 1, 1, {(2, 0): [[1]]})


def test_symbol_at_fields():
    op = gallery.get("div_curl_n2")
    ev = symbol_at(op, (1, 2), field="exact")
    assert ev.matrix == [[1, 2], [-2, 1]]
    ev = symbol_at(op, (1, 1j), field="complex")
    assert ev.min_singular_value < 1e-12
    assert exact_rank(op, (3, 4)) == 2


def test_transform_target_composes_with_matrix():
    op = gallery.get("div_curl_n2")
    m = [[1, 1], [0, 2]]
    t = op.transform_target(m)
    xi = (Fraction(2), Fraction(-3))
    b = op.exact_symbol(xi)
    expected = [[sum(m[i][r] * b[r][j] for r in range(2)) for j in range(2)] for i in range(2)]
    assert t.exact_symbol(xi) == expected


def test_small_evaluation_examples():
    assert symbol_at(gallery.get("grad_n2"), (1, 0)).min_singular_value == pytest.approx(1)
    assert symbol_at(gallery.get("mixed_partials_n2"), (1, 0)).min_singular_value == 0
    assert symbol_at(gallery.get("example_ab"), (1, 1), field="exact").matrix == [[2], [3]]
    lap = gallery.get("laplace_n2")
    assert pseudo_inverse_at(lap, (1.0, 0.0))[0, 0] == pytest.approx(1)
    assert pseudo_inverse_at(lap, (2.0, 0.0))[0, 0] == pytest.approx(0.25)
    assert np.allclose(pseudo_inverse_at(gallery.get("grad_n2"), (0.0, 1.0)), [[0, 1]])


def test_compose_first_order_line():
    d = gallery.get("dn_n1")
    assert compose(d, d).coeffs == {(2,): ((1,),)}


def test_lap_div_curl_is_composite():
    op = gallery.get("lap_div_curl_n3")
    assert (op.n, op.k, op.dim_v, op.dim_w) == (3, 3, 3, 4)
