from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opan import gallery
from opan.classify import (
    FAILS_EXACT,
    HOLDS_EXACT,
    ClassifyConfig,
    Verdict,
    check_c_ellipticity,
    check_ellipticity,
    check_weak_canceling,
    classify,
    compute_intersection,
    compute_L,
    membership_minor,
    sphere_points,
)
from opan.dsl import parse_operator
from opan.errors import DimensionMismatchError, ExhaustionError, NotEllipticError
from opan.linalg import contains, det, matvec, same_span
from opan.report import emit_report

from strategies import invertible_matrices

PLANE = ["grad_n2", "dn_n2", "laplace_n2", "div_curl_n2", "mixed_partials_n2", "example_ab", "example_aa", "bitsadze_n2"]


@pytest.mark.parametrize("entry", gallery.gallery(), ids=lambda e: e.id)
def test_gallery_expectations(entry, gallery_reports):
    checks = gallery.check_entry(entry, gallery_reports[entry.id])
    assert all(ok for _, _, ok in checks.values()), checks


@pytest.mark.parametrize("name", PLANE)
def test_plane_verdicts_are_exact(name, gallery_reports):
    rep = gallery_reports[name]
    assert rep.elliptic.exact and rep.c_elliptic.exact
    if rep.canceling is not None:
        assert rep.canceling.exact


@pytest.mark.parametrize("name", [e.id for e in gallery.gallery()])
def test_canceling_implies_weakly_canceling(name, gallery_reports):
    rep = gallery_reports[name]
    if rep.canceling is not None and rep.canceling.holds and rep.weakly_canceling is not None:
        assert rep.weakly_canceling.holds


def test_mixed_partials_witness():
    v = check_ellipticity(gallery.get("mixed_partials_n2"))
    assert v.status == FAILS_EXACT
    assert v.witness["point"] in ((1, 0), (0, 1))
    op = gallery.get("mixed_partials_n2")
    assert all(x == 0 for row in op.exact_symbol(v.witness["point"]) for x in row)


def test_exact_verdict_requires_witness():
    with pytest.raises(ValueError):
        Verdict(HOLDS_EXACT, 1.0, None)


def test_irrational_degeneracy_gets_interval_certificate():
    # symbol xi1^2 - 2 xi2^2 vanishes on an irrational direction
    op = parse_operator("dim 2 order 2 from 1 to 1 [ d1^2 - 2 d2^2 ]")
    v = check_ellipticity(op)
    assert v.status == FAILS_EXACT
    a, b = v.witness["root_interval_t"]
    assert b - a < Fraction(1, 2**30)


def test_div_curl_plane_factor():
    v = check_c_ellipticity(gallery.get("div_curl_n2"))
    assert v.status == FAILS_EXACT and v.witness["factor"] == "xi1^2 + xi2^2"
    xi = np.array(v.witness["xi"], dtype=complex)
    ker = np.array(v.witness["kernel"], dtype=complex)
    sym = gallery.get("div_curl_n2").symbol_batch(xi)
    assert np.linalg.norm(sym @ ker) < 1e-12


def test_bitsadze_complex_witness():
    v = check_c_ellipticity(gallery.get("bitsadze_n2"))
    xi = np.array(v.witness["xi"], dtype=complex)
    assert np.allclose(xi, [1, 1j]) or np.allclose(xi, [1, -1j])


def test_c_elliptic_three_dimensions():
    assert check_c_ellipticity(gallery.get("dn_n3")).holds
    v = check_c_ellipticity(gallery.get("div_curl_n3"))
    assert not v.holds
    sym = gallery.get("div_curl_n3").symbol_batch(np.array(v.witness["xi"], dtype=complex))
    assert np.linalg.norm(sym @ np.array(v.witness["kernel"], dtype=complex)) < 1e-6


# intersection of images


def test_intersection_history_is_monotone():
    for name in ("lap_div_curl_n3", "bitsadze_n2", "dn_n2", "div_curl_n3"):
        sub = compute_intersection(gallery.get(name))
        assert sub.certified
        assert all(a >= b for a, b in zip(sub.history, sub.history[1:]))


def test_intersection_lies_in_every_image():
    op = gallery.get("lap_div_curl_n3")
    sub = compute_intersection(op)
    assert sub.dim == 1
    for xi in [(1, 2, 3), (-4, 0, 7), (5, -1, 1)]:
        m = op.exact_symbol(xi)
        cols = [tuple(m[i][j] for i in range(op.dim_w)) for j in range(op.dim_v)]
        assert contains(cols, sub.basis[0])


def test_intersection_exhaustion_reports_best_so_far():
    with pytest.raises(ExhaustionError) as info:
        compute_intersection(gallery.get("lap_div_curl_n3"), ClassifyConfig(max_directions=3))
    assert info.value.subspace.certified is False


def test_intersection_refuses_non_elliptic():
    with pytest.raises(NotEllipticError):
        compute_intersection(gallery.get("mixed_partials_n2"))


def test_membership_minor():
    op = gallery.get("grad_n2")
    sub = compute_intersection(op)
    minor = membership_minor(op, sub, (1, 0))
    assert minor is not None and not minor.is_zero()
    op = gallery.get("bitsadze_n2")
    assert membership_minor(op, compute_intersection(op), (1, 0)) is None


# the L map and weak cancellation


def test_L_converges_with_quadrature():
    op = gallery.get("example_ab")
    ref = compute_L(op, ClassifyConfig(quadrature_points=1024)).matrix
    errs = [np.abs(compute_L(op, ClassifyConfig(quadrature_points=p)).matrix - ref).max() for p in (4, 8, 16, 32)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-10


def test_L_vanishes_in_odd_dimension():
    # the integrand is odd under xi -> -xi when n is odd
    L = compute_L(gallery.get("lap_div_curl_n3"))
    assert np.abs(L.matrix).max() < 1e-12 * L.scale


def test_laplacian_L_is_circumference():
    L = compute_L(gallery.get("laplace_n2"))
    assert L.matrix.shape == (1, 1)
    assert abs(L.matrix[0, 0] - 2 * np.pi) < 1e-12


def test_L_requires_order_at_least_dimension():
    with pytest.raises(DimensionMismatchError):
        compute_L(gallery.get("grad_n2"))


def test_weak_canceling_not_applicable_below_dimension(gallery_reports):
    rep = gallery_reports["div_curl_n2"]
    assert rep.intersection.dim == 2
    assert rep.weakly_canceling is None
    assert check_weak_canceling(gallery.get("div_curl_n2"), rep.intersection, None) is None


def test_weak_canceling_vacuous_when_intersection_trivial(gallery_reports):
    v = gallery_reports["grad_n2"].weakly_canceling
    assert v.status == HOLDS_EXACT and v.witness["vacuous"]


# invariances


def _status(v):
    return None if v is None else v.status


@given(invertible_matrices(2))
@settings(max_examples=10)
def test_change_of_target_basis_plane(m):
    for name in ("bitsadze_n2", "div_curl_n2"):
        op = gallery.get(name)
        a, b = classify(op), classify(op.transform_target(m))
        for key in ("elliptic", "c_elliptic", "canceling", "weakly_canceling"):
            assert _status(getattr(a, key)) == _status(getattr(b, key))


def test_classification_is_deterministic():
    op = gallery.get("lap_div_curl_n3")
    assert emit_report(classify(op)) == emit_report(classify(op))


def test_seed_changes_only_sampling():
    op = gallery.get("dn_n3")
    a, b = classify(op, ClassifyConfig(seed=1)), classify(op, ClassifyConfig(seed=2))
    assert a.elliptic.status == b.elliptic.status


def test_sphere_points_on_sphere():
    pts = sphere_points(4, 500, seed=0)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1)


def test_predictions_strings(gallery_reports):
    assert "BV^B maps continuous" in gallery_reports["dn_n2"].predictions
    assert "BV^B in L-infinity only (bounded, not continuous)" in gallery_reports["lap_div_curl_n3"].predictions
    assert "continuous up to boundary on cubes" in gallery_reports["example_ab"].predictions
    assert gallery_reports["grad_n2"].predictions == []


def test_intersection_transforms_with_target_map():
    rng = np.random.default_rng(5)
    op = gallery.get("lap_div_curl_n3")
    base = compute_intersection(op)
    for _ in range(3):
        m = [[Fraction(int(x)) for x in row] for row in rng.integers(-3, 4, (4, 4))]
        if det(m) == 0:
            continue
        moved = compute_intersection(op.transform_target(m))
        assert same_span(moved.basis, [matvec(m, v) for v in base.basis])


def test_intersection_contained_in_sampled_images():
    op = gallery.get("lap_div_curl_n3")
    sub = compute_intersection(op)
    for xi in sub.directions:
        m = op.exact_symbol(xi)
        cols = [tuple(m[i][j] for i in range(op.dim_w)) for j in range(op.dim_v)]
        assert all(contains(cols, w) for w in sub.basis)


def test_L_refinement_within_reported_error():
    op = gallery.get("example_ab")
    for p in (8, 16, 32):
        a = compute_L(op, ClassifyConfig(quadrature_points=p))
        b = compute_L(op, ClassifyConfig(quadrature_points=2 * p))
        assert np.linalg.norm(b.matrix - a.matrix) < a.quadrature_error


def test_weak_canceling_examples(gallery_reports):
    lap = gallery_reports["laplace_n2"]
    assert lap.weakly_canceling.status == "fails_numerical"
    assert [float(x) for x in lap.weakly_canceling.witness["w"]] == [1.0]
    bit = gallery_reports["bitsadze_n2"]
    assert bit.weakly_canceling.status == "holds_numerical" and bit.weakly_canceling.margin <= 1e-10
    assert np.abs(bit.L.matrix).max() < 1e-10
    assert abs(gallery_reports["dn_n1"].L.matrix).max() == 0
