import numpy as np
import pytest

from opan.strict import (
    StrictConfig,
    cone_2d,
    cone_limit_mass,
    eta2d,
    indicator_1d,
    mollified_cone,
    mollifier_cdf,
    strict_demo,
)


def test_mollifier_cdf():
    assert mollifier_cdf(-1.5) == 0 and mollifier_cdf(1.5) == 1
    assert mollifier_cdf(0.0) == pytest.approx(0.5, abs=1e-12)
    t = np.linspace(-1, 1, 101)
    assert np.allclose(mollifier_cdf(t) + mollifier_cdf(-t), 1, atol=1e-12)


def test_eta2d_has_unit_mass():
    eps, n = 0.3, 400
    x = np.linspace(-eps, eps, n, endpoint=False) + eps / n
    X, Y = np.meshgrid(x, x)
    assert eta2d(np.hypot(X, Y), eps).sum() * (2 * eps / n) ** 2 == pytest.approx(1, abs=1e-6)


def test_indicator_strict_but_not_uniform():
    rep = indicator_1d(StrictConfig(eps=(1e-2, 1e-3)))
    for row in rep.rows:
        assert abs(row["tv"] - 2) < 1e-6
        assert row["sup_distance"] >= 0.49
    assert rep.rows[1]["l1_distance"] < rep.rows[0]["l1_distance"]


def test_cone_engine_matches_fft_mollification():
    # independent check: mollify the cone on a grid by FFT convolution
    eps, n, box = 0.2, 512, 1.6
    h = 2 * box / n
    x = -box + h * np.arange(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    r = np.hypot(X, Y)
    kern = eta2d(r, eps) * h * h
    ue = np.real(np.fft.ifft2(np.fft.fft2(np.maximum(0, 1 - r)) * np.fft.fft2(np.fft.ifftshift(kern))))
    idx = n // 2 + np.array([0, 64, 128, 200])
    ours, _ = mollified_cone(x[idx], eps)
    assert np.allclose(ours, ue[idx, n // 2], atol=2e-4)


def test_cone_gradient_matches_difference_quotient():
    eps = 0.1
    r = np.array([0.05, 0.5, 0.95, 1.05])
    step = 1e-5
    up, _ = mollified_cone(r + step, eps)
    um, _ = mollified_cone(r - step, eps)
    _, g = mollified_cone(r, eps)
    assert np.allclose(g, (up - um) / (2 * step), atol=1e-6)


def test_cone_masses_approach_limit():
    rep = cone_2d(StrictConfig(eps=(0.2, 0.1, 0.05)))
    errs = [row["mass_rel_error"] for row in rep.rows]
    assert errs[0] > errs[1] > errs[2]
    assert rep.limit_mass == pytest.approx(cone_limit_mass())
    assert all(row["mass"] < rep.limit_mass for row in rep.rows)


def test_unknown_case():
    with pytest.raises(ValueError):
        strict_demo("nope")


def test_embedding_schedule_reaches_target():
    rep = strict_demo("embedding_2d")
    dist = [row["grad_l2_distance"] for row in rep.rows]
    assert all(a > b for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 0.01
    sup = [row["sup_distance"] for row in rep.rows]
    assert all(a > b for a, b in zip(sup, sup[1:]))
