"""Desk-scale experiments on L1-type estimates, moduli of continuity and
boundary behaviour.  Boundedness claims here are empirical: a ratio table is
a regression record, not a proof."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .classify import (
    ClassifyConfig,
    check_c_ellipticity,
    check_ellipticity,
    classify,
    compute_intersection,
)
from .errors import (
    BandError,
    CEllipticError,
    DimensionMismatchError,
    PreconditionError,
    ResolutionError,
    ShapeMismatchError,
    UnknownExponentError,
    WitnessInvalidError,
)
from .grid import GridField, axis_points, spectral_monomials
from .operator import Operator
from .poly import multi_indices


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("OPAN_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    """Ordered map, optionally threaded (OPAN_THREADS); results keep input order."""
    items = list(items)
    workers = min(_threads(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class FieldConfig:
    grid: int = 256
    band: int = 8
    box: float = 1.0
    envelope: bool = True


def random_test_field(n: int, dim_v: int, seed: int, cfg: FieldConfig = FieldConfig()) -> GridField:
    """Random real trigonometric polynomial with all frequencies ``|m_i| <= band``.

    The envelope ``prod((1 + cos(pi x_i / box)) / 2)^p`` with ``p = band // 2``
    vanishes to order 2p on the box faces, so the periodic field is a smooth
    stand-in for a compactly supported one.
    """
    npts, band = cfg.grid, cfg.band
    if band < 1 or band >= npts // 2:
        raise BandError(f"band {band} must lie in [1, {npts // 2})")
    p = band // 2 if cfg.envelope else 0
    degree = band - p
    rng = np.random.default_rng(seed)
    shape = (npts,) * n
    modes = np.arange(-degree, degree + 1)
    coeffs = rng.standard_normal((dim_v,) + (len(modes),) * n) + 1j * rng.standard_normal((dim_v,) + (len(modes),) * n)
    spectrum = np.zeros((dim_v,) + shape, dtype=complex)
    idx = np.ix_(*([np.arange(dim_v)] + [modes % npts] * n))
    spectrum[idx] = coeffs
    axes = tuple(range(1, n + 1))
    x = axis_points(npts, cfg.box)
    # index m carries wave number pi m / box; the shift of the grid origin only rotates random phases
    u = np.real(np.fft.ifftn(spectrum, axes=axes)) * npts**n
    if p:
        env1 = ((1 + np.cos(np.pi * x / cfg.box)) / 2) ** p
        env = env1
        for _ in range(n - 1):
            env = np.multiply.outer(env, env1)
        u = u * env[None]
    peak = np.sqrt((u**2).sum(axis=0)).max()
    u = u / peak
    return GridField(n, cfg.box, npts, u, meta={"seed": seed, "band": band, "envelope": cfg.envelope})


def apply_operator(op: Operator, fld: GridField) -> GridField:
    """Spectral evaluation of ``sum B_beta d^beta u``."""
    if fld.n != op.n or fld.dim != op.dim_v:
        raise ShapeMismatchError(f"operator expects n={op.n}, dim_v={op.dim_v}; field has n={fld.n}, dim={fld.dim}")
    betas = list(op.coeffs)
    monos = spectral_monomials(betas, op.n, fld.points_per_axis, fld.box_halfwidth)
    axes = tuple(range(1, op.n + 1))
    uh = np.fft.fftn(fld.values, axes=axes)
    out = np.zeros((op.dim_w,) + uh.shape[1:], dtype=complex)
    for beta, m in zip(betas, monos):
        out += np.einsum("wv,v...->w...", np.array(op.coeffs[beta], dtype=float), uh) * m
    return fld.with_values(np.real(np.fft.ifftn(out, axes=axes)), origin_excluded=False)


def derivatives(fld: GridField, order: int) -> GridField:
    """All order-``order`` partials, multiset layout: component (v, gamma) at v * m + gamma."""
    if order == 0:
        return fld
    gammas = multi_indices(fld.n, order)
    monos = spectral_monomials(gammas, fld.n, fld.points_per_axis, fld.box_halfwidth)
    axes = tuple(range(1, fld.n + 1))
    uh = np.fft.fftn(fld.values, axes=axes)
    parts = [np.real(np.fft.ifftn(uh[v] * m)) for v in range(fld.dim) for m in monos]
    return fld.with_values(np.array(parts))


def region_mask(fld: GridField, region: str = "all", center=None, radius: float | None = None) -> np.ndarray:
    if region == "all":
        return np.ones((fld.points_per_axis,) * fld.n, dtype=bool)
    c = np.zeros(fld.n) if center is None else np.asarray(center, dtype=float)
    coords = fld.coords()
    if radius is None:
        raise ValueError("ball and cube regions need a radius")
    if region == "ball":
        return sum((x - ci) ** 2 for x, ci in zip(coords, c)) <= radius**2
    if region == "cube":
        return np.all([np.abs(x - ci) <= radius for x, ci in zip(coords, c)], axis=0)
    raise ValueError(f"unknown region {region!r}")


def allowed_exponents(n: int) -> list:
    return [1, math.inf] + [n / (n - j) for j in range(1, n)] + ["tv"]


def norms(fld: GridField, p, region: str = "all", center=None, radius: float | None = None) -> float:
    """Riemann-sum norms of the pointwise Euclidean length; ``p='tv'`` is the
    forward-difference total variation."""
    if isinstance(p, str) and p in ("inf", "infinity"):
        p = math.inf
    if not any(p == q for q in allowed_exponents(fld.n)):
        raise UnknownExponentError(f"exponent {p!r} not in {allowed_exponents(fld.n)}")
    mask = region_mask(fld, region, center, radius)
    vol = fld.cell_volume
    if p == "tv":
        grads = [np.diff(fld.values, axis=a + 1, append=fld.values.take([0], axis=a + 1)) for a in range(fld.n)]
        dens = np.sqrt(sum((g**2).sum(axis=0) for g in grads)) / fld.spacing
        return float(dens[mask].sum() * vol)
    mag = np.sqrt((fld.values**2).sum(axis=0))[mask]
    if p == math.inf:
        return float(mag.max()) if mag.size else 0.0
    if p == 1:
        return float(mag.sum() * vol)
    return float((mag**p).sum() * vol) ** (1 / p)


# ----------------------------------------------------------------------------
# inequality ratios


@dataclass(frozen=True)
class VerifyConfig:
    num_fields: int = 100
    seed: int = 0
    grid: int | None = None  # default per dimension
    band: int = 8
    j: int = 1

    def grid_for(self, n: int) -> int:
        return self.grid or {1: 4096, 2: 256, 3: 64}.get(n, 32)


@dataclass
class RatioReport:
    inequality: str
    rows: list[dict]
    max_ratio: float
    config: dict
    note: str = "empirical boundedness over seeded fields; not a proof"


def _require(cond: bool, message: str, missing: str):
    if not cond:
        raise PreconditionError(message, missing)


def _ratio_row(op: Operator, which: str, cfg: VerifyConfig, seed: int) -> dict:
    n = op.n
    fcfg = FieldConfig(grid=cfg.grid_for(n), band=cfg.band, envelope=which != "cube_bound")
    u = random_test_field(n, op.dim_v, seed, fcfg)
    bu = apply_operator(op, u)
    if which == "vs_j":
        left = norms(derivatives(u, op.k - cfg.j), n / (n - cfg.j))
        right = norms(bu, 1)
    elif which == "linfty":
        left = norms(u, math.inf)
        right = norms(bu, 1)
    else:
        half = u.box_halfwidth / 2
        left = norms(u, math.inf, "cube", radius=half)
        right = norms(bu, 1, "cube", radius=half) + norms(u, 1, "cube", radius=half)
    return {"seed": seed, "left": left, "right": right, "ratio": left / right}


def verify_inequalities(
    op: Operator, which: str, cfg: VerifyConfig = VerifyConfig(), classify_cfg: ClassifyConfig = ClassifyConfig()
) -> RatioReport:
    """Tabulate left/right ratios of an inequality over random fields.

    Refuses when the classification predicts the inequality fails.
    """
    if which not in ("vs_j", "linfty", "cube_bound"):
        raise ValueError(f"unknown inequality {which!r}")
    ell = check_ellipticity(op, classify_cfg)
    _require(ell.holds, "operator is not elliptic", "elliptic")
    if which == "vs_j":
        if not 1 <= cfg.j <= min(op.k, op.n - 1):
            raise DimensionMismatchError(f"j must lie in 1..{min(op.k, op.n - 1)}")
        sub = compute_intersection(op, classify_cfg)
        _require(sub.dim == 0, "operator is not canceling", "canceling")
    elif which == "linfty":
        _require(op.k == op.n, "the L-infinity estimate needs order equal to dimension", "k = n")
        rep = classify(op, classify_cfg)
        ok = rep.weakly_canceling is not None and rep.weakly_canceling.holds
        _require(ok, "operator is not weakly canceling", "weakly canceling")
    else:
        _require(op.k == op.n and op.n > 1, "the cube bound needs order equal to dimension and n > 1", "k = n > 1")
        _require(check_c_ellipticity(op, classify_cfg).holds, "operator is not C-elliptic", "C-elliptic")
    rows = _map(lambda s: _ratio_row(op, which, cfg, s), range(cfg.seed, cfg.seed + cfg.num_fields))
    return RatioReport(which, rows, max(r["ratio"] for r in rows), {**asdict(cfg), "grid": cfg.grid_for(op.n)})


# ----------------------------------------------------------------------------
# modulus of continuity


@dataclass
class ModulusCurve:
    center: tuple[float, ...]
    radii: list[float]
    lhs: list[float]
    rhs: list[float]
    C_fit: float


def _ball_average(fld: GridField, center, r: float) -> np.ndarray:
    """Mean over grid cells lying fully inside the ball."""
    h = fld.spacing
    dist = np.sqrt(sum((x - c) ** 2 for x, c in zip(fld.coords(), center)))
    inside = dist + h * math.sqrt(fld.n) / 2 <= r
    if not inside.any():
        raise ResolutionError(f"no grid cell fits inside the ball of radius {r}")
    return fld.values[:, inside].mean(axis=1)


def modulus_experiment(
    op: Operator,
    fld: GridField,
    x: Sequence[float] | None = None,
    radii: Sequence[float] | None = None,
    intersection_dim: int | None = None,
) -> ModulusCurve:
    if op.k != op.n:
        raise PreconditionError("the modulus estimate needs order equal to dimension", "k = n")
    if intersection_dim is None:
        intersection_dim = compute_intersection(op).dim
    if intersection_dim != 0:
        raise PreconditionError("operator is not canceling", "canceling")
    h = fld.spacing
    center = tuple(float(c) for c in (x if x is not None else np.zeros(op.n)))
    if radii is None:
        radii = [0.4 * fld.box_halfwidth / 2**m for m in range(8) if 0.4 * fld.box_halfwidth / 2**m >= 4 * h]
    radii = sorted((float(r) for r in radii), reverse=True)
    if min(radii) < 4 * h:
        raise ResolutionError(f"radius {min(radii)} is below four grid spacings ({4 * h})")
    bu = apply_operator(op, fld)
    derivs = [(derivatives(fld, op.n - j), op.n / (op.n - j)) for j in range(1, op.n)]
    dist = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(fld.coords(), center)))
    lhs, rhs = [], []
    for r in radii:
        avg = _ball_average(fld, center, r)
        ball = dist <= r
        dev = np.sqrt(((fld.values[:, ball] - avg[:, None]) ** 2).sum(axis=0))
        lhs.append(float(dev.max()))
        total = norms(bu, 1, "ball", center, 2 * r)
        total += sum(norms(d, p, "ball", center, 2 * r) for d, p in derivs)
        rhs.append(total)
    c_fit = max(a / b for a, b in zip(lhs, rhs))
    return ModulusCurve(center, radii, lhs, rhs, c_fit)


def modulus_suite(op: Operator, seeds: Sequence[int], cfg: FieldConfig = FieldConfig(), radii=None) -> tuple[float, list[ModulusCurve]]:
    """One C_fit covering every field and radius."""
    dim = compute_intersection(op).dim
    curves = _map(
        lambda s: modulus_experiment(op, random_test_field(op.n, op.dim_v, s, cfg), radii=radii, intersection_dim=dim),
        seeds,
    )
    return max(c.C_fit for c in curves), curves


# ----------------------------------------------------------------------------
# boundary counterexample (n = 2)


@dataclass(frozen=True)
class BoundaryConfig:
    grid: int = 1024
    half_side: float = 1.0
    cutoff: float = 0.1  # Bu mass is measured outside this distance from x0
    slope_points: int = 10


@dataclass
class BoundaryResult:
    field: GridField
    report: dict


def _witness_from_classifier(op: Operator):
    verdict = check_c_ellipticity(op)
    if verdict.holds:
        raise CEllipticError(
            "operator is C-elliptic, so it admits no such counterexample: maps are continuous up to the boundary",
            "not C-elliptic",
        )
    return np.array(verdict.witness["xi"], dtype=complex), np.array(verdict.witness["kernel"], dtype=complex)


def _cut_and_anchor(xi: np.ndarray, half: float):
    """Direction of the log branch cut and the boundary point it leaves from."""
    re, im = xi.real, xi.imag
    d = np.array([-re[1], re[0]])
    if d @ im > 0:
        d = -d
    d = d / np.linalg.norm(d)
    normals = {(1, 0): (half, 0.0), (-1, 0): (-half, 0.0), (0, 1): (0.0, half), (0, -1): (0.0, -half)}
    best = max(normals, key=lambda nv: d @ np.array(nv))
    return d, np.array(normals[best]), np.array(best, dtype=float)


def _log_branch(z: np.ndarray) -> np.ndarray:
    """log z with the cut on the negative imaginary axis (arg in (-pi/2, 3pi/2])."""
    return np.log(np.abs(z)) + 1j * (np.angle(z / 1j) + np.pi / 2)


def _closed_form(points: np.ndarray, x0, xi, v, use_real: bool) -> np.ndarray:
    z = (points[..., 0] - x0[0]) * xi[0] + (points[..., 1] - x0[1]) * xi[1]
    u = _log_branch(z)[..., None] * v
    return u.real if use_real else u.imag


def _boundary_masses(op, npts, cfg, x0, xi, v, use_real) -> dict:
    half = cfg.half_side
    h = 2 * half / npts
    ax = axis_points(npts, half, cell_centered=True)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X1, X2], -1)
    z = (X1 - x0[0]) * xi[0] + (X2 - x0[1]) * xi[1]
    u = _closed_form(pts, x0, xi, v, use_real)
    inv = 1 / z
    du_sq = np.zeros_like(X1)
    for vi in v:
        for xj in xi:
            part = inv * (vi * xj)
            du_sq += (part.real if use_real else part.imag) ** 2
    l1_u = float(np.sqrt((u**2).sum(-1)).sum() * h * h)
    l1_du = float(np.sqrt(du_sq).sum() * h * h)
    del inv, du_sq, pts
    # B u by central differences, away from x0 and the faces
    comps = np.moveaxis(u, -1, 0)
    bu = np.zeros((op.dim_w,) + X1.shape)
    for beta, mat in op.coeffs.items():
        part = comps
        for axis, b in enumerate(beta):
            for _ in range(b):
                part = np.gradient(part, h, axis=axis + 1, edge_order=2)
        bu += np.einsum("wv,v...->w...", np.array(mat, dtype=float), part)
    dist = np.hypot(X1 - x0[0], X2 - x0[1])
    inner = np.ones_like(dist, dtype=bool)
    inner[: op.k, :] = inner[-op.k :, :] = inner[:, : op.k] = inner[:, -op.k :] = False
    keep = (dist >= cfg.cutoff) & inner
    bu_mass = float(np.sqrt((bu**2).sum(0))[keep].sum() * h * h)
    return {"grid": npts, "L1_u": l1_u, "L1_Du": l1_du, "Bu_mass_outside_cutoff": bu_mass}


def boundary_counterexample(op: Operator, witness=None, cfg: BoundaryConfig = BoundaryConfig()) -> BoundaryResult:
    """Realified ``log((x - x0).xi) v`` on the cube ``[-R, R]^2``.

    ``x0`` is the midpoint of the face the branch cut leaves through, so the
    map is real-analytic in the open cube and blows up logarithmically at x0.
    """
    if op.n != 2:
        raise DimensionMismatchError("the boundary construction is implemented for n = 2")
    if not check_ellipticity(op).holds:
        raise PreconditionError("operator is not elliptic", "elliptic")
    if witness is None:
        xi, v = _witness_from_classifier(op)
    else:
        if check_c_ellipticity(op).holds:
            raise CEllipticError("operator is C-elliptic, so it admits no such counterexample", "not C-elliptic")
        xi, v = (np.asarray(a, dtype=complex) for a in witness)
    mat = op.symbol_batch(xi)
    scale = np.linalg.norm(mat) * np.linalg.norm(v)
    if scale == 0 or np.linalg.norm(mat @ v) > 1e-10 * scale:
        raise WitnessInvalidError(f"|B(xi) v| = {np.linalg.norm(mat @ v):.3e} is not zero")
    use_real = np.linalg.norm(v.real) >= np.linalg.norm(v.imag)
    half = cfg.half_side
    cut, x0, normal = _cut_and_anchor(xi, half)
    npts = cfg.grid
    h = 2 * half / npts
    ax = axis_points(npts, half, cell_centered=True)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    u = _closed_form(np.stack([X1, X2], -1), x0, xi, v, use_real)
    fld = GridField(2, half, npts, np.moveaxis(u, -1, 0), cell_centered=True, meta={"x0": x0.tolist()})

    # at 16 cells the grid resolves the angular maximum next to the face
    dists = np.geomspace(16 * h, half / 4, cfg.slope_points)
    dist = np.hypot(X1 - x0[0], X2 - x0[1])
    mag = np.sqrt((u**2).sum(-1))
    grid_sup = np.array([mag[(dist >= d) & (dist < 1.5 * d)].max() for d in dists])
    # oracle: the same statistic on a dense polar sampling of the closed form
    tangent = np.array([-normal[1], normal[0]])
    oracle_sup = []
    for d in dists:
        rho = np.linspace(d, 1.5 * d, 200, endpoint=False)
        ang = np.linspace(0, np.pi, 721)
        rr, aa = np.meshgrid(rho, ang, indexing="ij")
        pts = x0 + rr[..., None] * (np.cos(aa)[..., None] * tangent - np.sin(aa)[..., None] * normal)
        inside = np.all(np.abs(pts) <= half, axis=-1)
        vals = np.sqrt((_closed_form(pts, x0, xi, v, use_real) ** 2).sum(-1))
        oracle_sup.append(vals[inside].max())
    logs = np.log(1 / dists)
    slope = float(np.polyfit(logs, grid_sup, 1)[0])
    oracle_slope = float(np.polyfit(logs, np.array(oracle_sup), 1)[0])
    asymptotic = float(np.linalg.norm(v.real if use_real else v.imag))

    coarse = _boundary_masses(op, npts, cfg, x0, xi, v, use_real)
    fine = _boundary_masses(op, 2 * npts, cfg, x0, xi, v, use_real)
    bounded = all(fine[key] <= 1.1 * coarse[key] + 1e-6 for key in ("L1_u", "L1_Du", "Bu_mass_outside_cutoff"))
    report = {
        "xi": [complex(z) for z in xi],
        "v": [complex(z) for z in v],
        "component": "real" if use_real else "imag",
        "x0": x0.tolist(),
        "cut_direction": cut.tolist(),
        "distances": dists.tolist(),
        "grid_sup": grid_sup.tolist(),
        "oracle_sup": [float(s) for s in oracle_sup],
        "slope": slope,
        "oracle_slope": oracle_slope,
        "asymptotic_slope": asymptotic,
        "slope_rel_error": abs(slope - oracle_slope) / abs(oracle_slope),
        "masses": [coarse, fine],
        "norms_bounded": bounded,
    }
    return BoundaryResult(fld, report)
