import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opan import gallery
from opan.dsl import parse_operator
from opan.classify import compute_intersection
from opan.errors import DimensionMismatchError, IllConditionedFitError, MembershipError
from opan.kernel import (
    DecomposeConfig,
    KernelConfig,
    compensation_coefficients,
    decompose_kernel,
    default_radii,
    dirac_residual,
    discontinuity_witness,
    nuisance_powers,
    solve_dirac,
    window,
    write_oscillation_csv,
    write_profile_csv,
)

SMALL = KernelConfig(grid=64)


@pytest.fixture(scope="module")
def laplace_512():
    return solve_dirac(gallery.get("laplace_n2"), (1,), KernelConfig())


@pytest.fixture(scope="module")
def bitsadze_512():
    return solve_dirac(gallery.get("bitsadze_n2"), (1, 0), KernelConfig())


def test_window_profile():
    rho = np.linspace(0, 10, 1001)
    chi = window(rho, 2.0, 8.0)
    assert np.all(chi[rho <= 2] == 1) and np.all(chi[rho >= 8] == 0)
    assert np.all(np.diff(chi) <= 1e-15)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=8)
def test_solve_dirac_is_linear(a, b):
    op = gallery.get("bitsadze_n2")
    e1 = solve_dirac(op, (1, 0), SMALL).values
    e2 = solve_dirac(op, (0, 1), SMALL).values
    from fractions import Fraction

    fa, fb = Fraction(a).limit_denominator(1000), Fraction(b).limit_denominator(1000)
    mix = solve_dirac(op, (fa, fb), SMALL).values
    assert np.allclose(mix, float(fa) * e1 + float(fb) * e2, atol=1e-12)


@pytest.mark.parametrize("name,grid", [("laplace_n2", 128), ("bitsadze_n2", 128), ("lap_div_curl_n3", 32)])
def test_field_is_real_and_residual_small(name, grid):
    op = gallery.get(name)
    w = compute_intersection(op).basis[-1]
    cfg = KernelConfig(grid=grid)
    fld = solve_dirac(op, w, cfg)
    assert np.isrealobj(fld.values)
    assert dirac_residual(op, fld, w, cfg) < 1e-10


def test_constant_multiple_scales_kernel():
    op = gallery.get("laplace_n2")
    op3 = op.transform_target([[3]])
    u = solve_dirac(op, (1,), SMALL).values
    u3 = solve_dirac(op3, (1,), SMALL).values
    assert np.allclose(u3 * 3, u, atol=1e-12)


def test_laplace_log_differences(laplace_512):
    # u(x) - u(y) = log(|x|/|y|) / (2 pi) for the planar Laplacian
    pts = np.array([[0.2, 0.1, 0.05], [0.0, 0.0, 0.0]])
    vals = laplace_512.sample(pts)[0]
    for i, j in ((0, 1), (1, 2)):
        expect = math.log(pts[0, i] / pts[0, j]) / (2 * math.pi)
        assert abs((vals[i] - vals[j]) - expect) < 0.01 * abs(expect)


def test_laplace_decomposition(laplace_512):
    model = decompose_kernel(laplace_512, gallery.get("laplace_n2"), (1,))
    assert abs(model.log_vector[0] - 1 / (2 * math.pi)) < 0.01 / (2 * math.pi)
    assert discontinuity_witness(model).kind == "unbounded"


def test_bitsadze_profile(bitsadze_512, tmp_path):
    model = decompose_kernel(bitsadze_512, gallery.get("bitsadze_n2"), (1, 0))
    rep = discontinuity_witness(model)
    assert rep.kind == "bounded_discontinuous"
    osc = [o for _, o in rep.oscillation_by_radius]
    assert max(osc) / min(osc) - 1 < 0.05
    assert np.allclose(model.angular_profile.mean(axis=0), 0, atol=1e-14)
    write_oscillation_csv(rep, tmp_path / "osc.csv")
    write_profile_csv(model, tmp_path / "prof.csv")
    assert (tmp_path / "osc.csv").read_text().splitlines()[0] == "radius,oscillation"
    assert len((tmp_path / "prof.csv").read_text().splitlines()) == 65


def test_compensation_matches_closed_forms():
    # Fischer-norm minimal polynomials: |x|^2/(4A) for the Laplacian
    c = compensation_coefficients(gallery.get("laplace_n2"), np.array([1.0]), 4.0)
    assert np.isclose(c[(2, 0)][0], 1 / 16) and np.isclose(c[(0, 2)][0], 1 / 16)


def test_membership_checked_before_shape():
    with pytest.raises(MembershipError):
        solve_dirac(gallery.get("grad_n2"), (1, 0), SMALL)


def test_order_must_equal_dimension():
    op = parse_operator("dim 3 order 2 from 1 to 1 [ d1^2 + d2^2 + d3^2 ]")
    with pytest.raises(DimensionMismatchError):
        solve_dirac(op, (1,), KernelConfig(grid=16))


def test_radii_must_span_a_decade(bitsadze_512):
    with pytest.raises(IllConditionedFitError):
        decompose_kernel(bitsadze_512, gallery.get("bitsadze_n2"), (1, 0), DecomposeConfig(radii=(0.1, 0.2, 0.4)))


def test_helpers():
    assert nuisance_powers(2) == (2,)
    assert nuisance_powers(3) == (1, 3)
    fld = solve_dirac(gallery.get("laplace_n2"), (1,), SMALL)
    r = default_radii(fld)
    assert r[-1] / r[0] == pytest.approx(10)


def test_window_independence_of_differences(laplace_512):
    wide = solve_dirac(gallery.get("laplace_n2"), (1,), KernelConfig(window_outer=2 * KernelConfig().resolved(2)[2]))
    t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    ring = lambda r: np.stack([r * np.cos(t), r * np.sin(t)])  # noqa: E731
    for r1, r2 in ((0.05, 0.5), (0.1, 0.3)):
        d0 = laplace_512.sample(ring(r1))[0] - laplace_512.sample(ring(r2))[0]
        d1 = wide.sample(ring(r1))[0] - wide.sample(ring(r2))[0]
        assert np.abs(d1 - d0).max() < 0.01 * np.abs(d0).min()


def test_laplace_differences_on_annulus(laplace_512):
    rng = np.random.default_rng(1)
    r = rng.uniform(0.05, 0.5, 20)
    t = rng.uniform(0, 2 * np.pi, 20)
    vals = laplace_512.sample(np.stack([r * np.cos(t), r * np.sin(t)]))[0]
    for i in range(0, 20, 2):
        expect = math.log(r[i] / r[i + 1]) / (2 * math.pi)
        assert abs(vals[i] - vals[i + 1] - expect) < 0.01 * max(abs(expect), 0.01)


def test_removable_kind_for_flat_model():
    from opan.kernel import KernelModel

    model = KernelModel(
        w=(1.0,),
        log_vector=np.zeros(1),
        log_coefficient=np.zeros((1, 1)),
        directions=np.eye(2),
        angular_profile=np.zeros((2, 1)),
        fit_residual=0.0,
        radii=np.geomspace(0.01, 0.1, 4),
    )
    assert discontinuity_witness(model).kind == "removable"
