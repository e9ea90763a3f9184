"""Fundamental solutions B u = delta_0 w by windowed Fourier inversion.

With the transform ``u^(xi) = int u(x) e^{-i x.xi} dx`` the symbol of B is
``i^k B(xi)`` and the solution multiplier is ``i^{-k} B^dagger(xi) w``.  The
periodic grid forces the zero mode to vanish, so the discrete solution
satisfies ``B u = delta_chi w - w / |box|``.  The constant defect is removed
by adding a degree-k polynomial ``q`` with ``B q = w / |box|`` (minimum-norm
coefficients).  Remaining smooth periodisation error is absorbed by nuisance
powers in the ray fits.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import ClassifyConfig, Subspace, compute_intersection, membership_minor, sphere_points
from .errors import DimensionMismatchError, IllConditionedFitError, MembershipError
from .grid import GridField, spectral_monomials, wavenumbers
from .operator import Operator, pseudo_inverse_batch
from .poly import as_fraction, format_poly


@dataclass(frozen=True)
class KernelConfig:
    grid: int | None = None  # 512 for n=2, 128 for n=3
    box: float = 1.0
    window_inner: float | None = None  # default 4 pi / box
    window_outer: float | None = None  # default 0.4 pi N / box
    compensate: bool = True

    def resolved(self, n: int) -> tuple[int, float, float]:
        npts = self.grid or {2: 512, 3: 128}[n]
        inner = self.window_inner if self.window_inner is not None else 4 * math.pi / self.box
        outer = self.window_outer if self.window_outer is not None else 0.4 * math.pi * npts / self.box
        if not 0 <= inner < outer:
            raise ValueError("window needs 0 <= inner < outer")
        return npts, inner, outer


def _smoothstep7(t):
    return t**4 * (35 - 84 * t + 70 * t**2 - 20 * t**3)


def window(rho: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """Radial taper: 1 up to ``inner``, C^3 roll-off to 0 at ``outer``.

    The roll-off uses t^8 inside the smooth step so the window stays nearly
    flat well past ``inner``; that keeps the small-radius behaviour of the
    kernel close to the unwindowed one.
    """
    t = np.clip((rho - inner) / (outer - inner), 0.0, 1.0)
    return 1.0 - _smoothstep7(t**8)


def _as_vector(w, dim: int) -> tuple[Fraction, ...]:
    vec = tuple(as_fraction(x) for x in w)
    if len(vec) != dim:
        raise DimensionMismatchError(f"w must have {dim} components")
    return vec


def compensation_coefficients(op: Operator, w: Sequence[float], volume: float) -> dict[tuple[int, ...], np.ndarray]:
    """c_beta with sum beta! B_beta c_beta = w / volume, minimal in the Fischer norm.

    The Fischer norm sum beta! |c_beta|^2 is rotation invariant, so the
    chosen polynomial carries no anisotropy beyond what B forces.
    """
    betas = list(op.coeffs)
    cols, weights = [], []
    for beta in betas:
        fact = math.prod(math.factorial(b) for b in beta)
        cols.append(math.sqrt(fact) * np.array(op.coeffs[beta], dtype=float))
        weights.append(1 / math.sqrt(fact))
    a = np.concatenate(cols, axis=1)  # dim_w x (dim_v * #beta)
    d, *_ = np.linalg.lstsq(a, np.asarray(w, dtype=float) / volume, rcond=None)
    return {beta: weights[i] * d[i * op.dim_v : (i + 1) * op.dim_v] for i, beta in enumerate(betas)}


def _polynomial_field(coeffs, coords) -> np.ndarray:
    out = None
    for beta, c in coeffs.items():
        mono = np.ones_like(coords[0])
        for x, b in zip(coords, beta):
            if b:
                mono = mono * x**b
        term = c[:, None] * mono.reshape(1, -1)
        out = term if out is None else out + term
    return out.reshape((-1,) + coords[0].shape)


def _check_shape(op: Operator):
    if op.k != op.n or op.n not in (2, 3):
        raise DimensionMismatchError(f"kernel grids need k = n in {{2, 3}} (got n={op.n}, k={op.k})")


def _multiplier(op: Operator, w: np.ndarray, npts: int, box: float, inner: float, outer: float):
    ks = wavenumbers(op.n, npts, box)
    pts = np.stack([k.ravel() for k in ks], axis=1)
    rho = np.linalg.norm(pts, axis=1)
    chi = window(rho, inner, outer)
    active = chi > 0
    active[0] = False  # zero mode
    mult = np.zeros((len(pts), op.dim_v), dtype=complex)
    pinv = pseudo_inverse_batch(op, pts[active])
    mult[active] = (1j) ** (-op.k) * (pinv @ w) * chi[active, None]
    return mult, chi


def solve_dirac(
    op: Operator,
    w,
    cfg: KernelConfig = KernelConfig(),
    intersection: Subspace | None = None,
    classify_cfg: ClassifyConfig = ClassifyConfig(),
) -> GridField:
    """Windowed fundamental solution for the source ``delta_0 w``.

    Only differences of the returned values are meaningful; the additive
    constant depends on the window.
    """
    wq = _as_vector(w, op.dim_w)
    sub = intersection if intersection is not None else compute_intersection(op, classify_cfg)
    minor = membership_minor(op, sub, wq)
    if minor is not None:
        raise MembershipError(
            f"w = {[str(x) for x in wq]} is not in the intersection of images; "
            f"nonvanishing minor of [B(xi) | w]: {format_poly(minor)}",
            minor,
        )
    _check_shape(op)
    npts, inner, outer = cfg.resolved(op.n)
    box = cfg.box
    wf = np.array([float(x) for x in wq])
    mult, _ = _multiplier(op, wf, npts, box, inner, outer)
    shape = (npts,) * op.n
    ks = wavenumbers(op.n, npts, box)
    # nodes start at -box: shift so index j maps to x = -box + j h
    phase = np.exp(-1j * box * sum(ks)).ravel()
    scale = npts**op.n / (2 * box) ** op.n
    u = np.stack(
        [np.real(np.fft.ifftn((mult[:, c] * phase).reshape(shape))) * scale for c in range(op.dim_v)]
    )
    meta = {"w": [str(x) for x in wq], "window": [inner, outer], "compensated": cfg.compensate}
    if cfg.compensate:
        coeffs = compensation_coefficients(op, wf, (2 * box) ** op.n)
        grid = GridField(op.n, box, npts, u)
        u = u + _polynomial_field(coeffs, grid.coords())
        meta["compensation"] = {",".join(map(str, b)): c.tolist() for b, c in coeffs.items()}
    return GridField(op.n, box, npts, u, origin_excluded=True, meta=meta)


def windowed_delta(n: int, npts: int, box: float, inner: float, outer: float) -> np.ndarray:
    ks = wavenumbers(n, npts, box)
    rho = np.sqrt(sum(k * k for k in ks))
    chi = window(rho, inner, outer)
    phase = np.exp(-1j * box * sum(ks))
    return np.real(np.fft.ifftn(chi * phase)) * npts**n / (2 * box) ** n


def apply_spectral(op: Operator, values: np.ndarray, npts: int, box: float) -> np.ndarray:
    """Spectral B u for periodic samples of shape (dim_v, N, ..., N)."""
    betas = list(op.coeffs)
    monos = spectral_monomials(betas, op.n, npts, box)
    axes = tuple(range(1, op.n + 1))
    uh = np.fft.fftn(values, axes=axes)
    out = np.zeros((op.dim_w,) + uh.shape[1:], dtype=complex)
    for beta, m in zip(betas, monos):
        b = np.array(op.coeffs[beta], dtype=float)
        out += np.einsum("wv,v...->w...", b, uh) * m
    return np.real(np.fft.ifftn(out, axes=axes))


def dirac_residual(op: Operator, field_: GridField, w, cfg: KernelConfig = KernelConfig()) -> float:
    """Relative L2 mismatch between B(u - q) and the mean-free windowed delta times w."""
    npts, inner, outer = cfg.resolved(op.n)
    wf = np.array([float(as_fraction(x)) for x in w])
    u = field_.values
    if field_.meta.get("compensated"):
        coeffs = compensation_coefficients(op, wf, (2 * cfg.box) ** op.n)
        u = u - _polynomial_field(coeffs, field_.coords())
    bu = apply_spectral(op, u, npts, cfg.box)
    delta = windowed_delta(op.n, npts, cfg.box, inner, outer)
    delta = delta - delta.mean()
    target = wf.reshape((-1,) + (1,) * op.n) * delta
    return float(np.linalg.norm(bu - target) / np.linalg.norm(target))


# ----------------------------------------------------------------------------
# decomposition into 0-homogeneous profile and logarithm


@dataclass(frozen=True)
class DecomposeConfig:
    rays: int = 64
    radii: tuple[float, ...] | None = None  # default: one decade ending at box / 4
    oscillation_radii: tuple[float, ...] = (0.2, 0.05, 0.0125)
    circle_samples: int = 720


@dataclass(frozen=True, eq=False)
class KernelModel:
    w: tuple[float, ...]
    log_vector: np.ndarray  # b, shape (dim_v,)
    log_coefficient: np.ndarray  # dim_v x dim_w, b w^T / |w|^2
    directions: np.ndarray  # rays x n
    angular_profile: np.ndarray  # rays x dim_v, mean zero
    fit_residual: float
    radii: np.ndarray
    field: GridField | None = None
    oscillation_radii: tuple[float, ...] = (0.2, 0.05, 0.0125)
    circle_samples: int = 720

    def predict(self, r: float) -> np.ndarray:
        """Profile plus log part along every ray at radius r (mean constant dropped)."""
        return self.angular_profile + math.log(r) * self.log_vector[None, :]


def _ray_directions(n: int, rays: int) -> np.ndarray:
    if n == 2:
        t = 2 * np.pi * np.arange(rays) / rays
        return np.stack([np.cos(t), np.sin(t)], 1)
    return sphere_points(n, rays)


def nuisance_powers(k: int) -> tuple[int, ...]:
    return tuple(p for p in range(1, k + 1) if p % 2 == k % 2)


def default_radii(field_: GridField, count_: int = 16) -> np.ndarray:
    """16 log-spaced radii over the decade [box/40, box/4]."""
    top = field_.box_halfwidth / 4
    return np.geomspace(top / 10, top, count_)


def decompose_kernel(field_: GridField, op: Operator, w, cfg: DecomposeConfig = DecomposeConfig()) -> KernelModel:
    h = field_.spacing
    radii = np.asarray(cfg.radii if cfg.radii is not None else default_radii(field_), dtype=float)
    if radii.min() <= 0 or radii.max() / radii.min() < 10:
        raise IllConditionedFitError("radii must span at least one decade")
    dirs = _ray_directions(field_.n, cfg.rays)
    pts = (radii[None, :, None] * dirs[:, None, :]).reshape(-1, field_.n).T
    vals = field_.sample(pts).reshape(field_.dim, len(dirs), len(radii))  # (dim_v, rays, radii)
    design = np.column_stack([np.ones_like(radii), np.log(radii)] + [radii**p for p in nuisance_powers(op.k)])
    coef, *_ = np.linalg.lstsq(design, vals.reshape(-1, len(radii)).T, rcond=None)
    fitted = design @ coef
    resid = vals.reshape(-1, len(radii)).T - fitted
    rms = np.sqrt(np.mean(resid**2, axis=0)).reshape(field_.dim, len(dirs))
    a = coef[0].reshape(field_.dim, len(dirs)).T  # rays x dim_v
    b_rays = coef[1].reshape(field_.dim, len(dirs)).T
    b = b_rays.mean(axis=0)
    wf = np.array([float(as_fraction(x)) for x in w])
    log_coefficient = np.outer(b, wf) / float(wf @ wf)
    return KernelModel(
        w=tuple(wf.tolist()),
        log_vector=b,
        log_coefficient=log_coefficient,
        directions=dirs,
        angular_profile=a - a.mean(axis=0),
        fit_residual=float(rms.max()),
        radii=radii,
        field=field_,
        oscillation_radii=cfg.oscillation_radii,
        circle_samples=cfg.circle_samples,
    )


@dataclass(frozen=True)
class WitnessReport:
    kind: str  # unbounded | bounded_discontinuous | removable
    log_norm: float
    profile_oscillation: float
    profile_norm: float
    oscillation_by_radius: tuple[tuple[float, float], ...] = field(default_factory=tuple)


def _diameter(values: np.ndarray) -> float:
    """Largest distance between two rows."""
    diff = values[:, None, :] - values[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def circle_oscillation(field_: GridField, r: float, samples: int = 720) -> float:
    if field_.n == 2:
        t = 2 * np.pi * np.arange(samples) / samples
        dirs = np.stack([np.cos(t), np.sin(t)], 1)
    else:
        dirs = sphere_points(field_.n, samples)
    vals = field_.sample((r * dirs).T).T
    return _diameter(vals)


def discontinuity_witness(model: KernelModel, tol: float = 1e-3) -> WitnessReport:
    log_norm = float(np.linalg.norm(model.log_vector))
    prof = model.angular_profile
    osc = _diameter(prof) if len(prof) > 1 else 0.0
    prof_norm = float(np.abs(prof).max()) if prof.size else 0.0
    scale = max(log_norm, osc)
    if scale <= 1e-10:
        kind = "removable"
    elif log_norm > tol * scale:
        kind = "unbounded"
    elif osc > tol:
        kind = "bounded_discontinuous"
    else:
        kind = "removable"
    table = ()
    if model.field is not None:
        table = tuple((float(r), circle_oscillation(model.field, r, model.circle_samples)) for r in model.oscillation_radii)
    return WitnessReport(kind, log_norm, osc, prof_norm, table)


def write_oscillation_csv(report: WitnessReport, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["radius", "oscillation"])
        for r, osc in report.oscillation_by_radius:
            writer.writerow([repr(r), repr(osc)])
    return path


def write_profile_csv(model: KernelModel, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        n = model.directions.shape[1]
        dim = model.angular_profile.shape[1]
        writer.writerow([f"x{i + 1}" for i in range(n)] + [f"h{j + 1}" for j in range(dim)])
        for d, p in zip(model.directions, model.angular_profile):
            writer.writerow([repr(float(x)) for x in d] + [repr(float(x)) for x in p])
    return path
