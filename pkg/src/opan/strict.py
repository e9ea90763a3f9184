"""Mollification demos contrasting strict and uniform convergence.

* ``indicator_1d``: u = 1_[0,1] on R with B = d/dx.  Total variation of the
  mollified step converges while the uniform distance stays at 1/2.
* ``cone_2d`` / ``embedding_2d``: u = max(0, 1 - |x|) on R^2 with B = D^2.
  Radial symmetry reduces the mollification to a two-dimensional quadrature
  in (s, phi), where s = |x - y| is the distance to the integration point.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

# ----------------------------------------------------------------------------
# the standard bump mollifier


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _norm_1d() -> float:
    return quad(lambda t: float(_bump(t)), -1, 1, epsabs=0, epsrel=1e-12, limit=200)[0]


@lru_cache(maxsize=None)
def _norm_2d() -> float:
    return 2 * math.pi * quad(lambda t: t * float(_bump(t)), 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0]


@lru_cache(maxsize=None)
def _cdf_table(points: int = 40_001):
    t = np.linspace(-1, 1, points)
    # cumulative Simpson on a fine grid; the bump is flat at the ends so this is spectrally accurate
    dens = _bump(t) / _norm_1d()
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(t))])
    cum /= cum[-1]
    return t, cum


def mollifier_cdf(t) -> np.ndarray:
    """Distribution function of the 1D standard mollifier (0 below -1, 1 above 1)."""
    grid, cum = _cdf_table()
    return np.interp(np.asarray(t, dtype=float), grid, cum, left=0.0, right=1.0)


def eta2d(rho, eps: float):
    return _bump(np.asarray(rho) / eps) / (_norm_2d() * eps * eps)


# ----------------------------------------------------------------------------
# reports


@dataclass
class StrictReport:
    case: str
    eps: list[float]
    rows: list[dict]
    limit_mass: float
    verdict: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StrictConfig:
    eps: tuple[float, ...] | None = None
    cells_per_eps: int = 10  # indicator_1d grid resolution
    panel_nodes: int = 24
    s_nodes: int = 48
    phi_nodes: int = 48
    theta_nodes: int = 64


def _indicator_schedule():
    return tuple(float(e) for e in np.geomspace(1e-1, 1e-4, 7))


def _cone_schedule():
    return tuple(0.2 * 2.0**-m for m in range(13))


# ----------------------------------------------------------------------------
# indicator of [0, 1] on the line


def indicator_1d(cfg: StrictConfig = StrictConfig()) -> StrictReport:
    from .estimates import norms
    from .grid import GridField

    schedule = cfg.eps or _indicator_schedule()
    rows = []
    for eps in schedule:
        h = eps / cfg.cells_per_eps
        npts = int(round(1.5 / h))
        npts += npts % 2
        box = npts * h / 2  # grid covers [0.5 - box, 0.5 + box)
        x = 0.5 - box + h * np.arange(npts)
        u = mollifier_cdf(x / eps) - mollifier_cdf((x - 1) / eps)
        fld = GridField(1, box, npts, u[None])
        tv = norms(fld, "tv")
        probe = np.concatenate([x, [0.0, 1.0]])
        u_probe = mollifier_cdf(probe / eps) - mollifier_cdf((probe - 1) / eps)
        closed = ((probe >= 0) & (probe <= 1)).astype(float)
        sup_gap = float(np.abs(u_probe - closed).max())
        l1 = float(np.abs(u - ((x >= 0) & (x <= 1))).sum() * h)
        rows.append({"eps": eps, "tv": tv, "sup_distance": sup_gap, "l1_distance": l1, "grid": npts})
    verdict = [
        "total variation converges to 2 and the L1 distance to 0 (strict convergence)",
        f"uniform distance stays >= {min(r['sup_distance'] for r in rows):.4f} (no uniform convergence)",
    ]
    return StrictReport("indicator_1d", list(schedule), rows, 2.0, verdict, asdict(cfg))


# ----------------------------------------------------------------------------
# radial mollification of the truncated cone


def cone(r):
    return np.maximum(0.0, 1.0 - np.asarray(r, dtype=float))


def cone_gradient(r):
    """Radial derivative of the cone (-1 inside the unit disc)."""
    return np.where(np.asarray(r) < 1.0, -1.0, 0.0)


def _angle_window(r, s, eps):
    """Half-width of the angular interval where |x - y| < eps (x at radius r, |y'| = s)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (r * r + s * s - eps * eps) / (2 * r * s)
    c = np.where((r == 0) | (s == 0), -1.0, c)
    return np.arccos(np.clip(c, -1.0, 1.0))


def mollified_cone(r: np.ndarray, eps: float, s_nodes: int = 48, phi_nodes: int = 48) -> tuple[np.ndarray, np.ndarray]:
    """u_eps(r) and its radial derivative g_eps(r).

    Substituting y' = x - y with |y'| = s and angle phi to x gives
    ``u_eps(r) = int u(s) s int eta_eps(|x - y'|) dphi ds``.  The s-range is
    split at the kink s = 1 and the phi-range is the support window.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    gs, gws = np.polynomial.legendre.leggauss(s_nodes)
    gp, gwp = np.polynomial.legendre.leggauss(phi_nodes)
    u_out = np.zeros_like(r)
    g_out = np.zeros_like(r)
    for i, ri in enumerate(r):
        lo, hi = max(0.0, ri - eps), ri + eps
        cuts = [lo] + [c for c in (1.0, eps - ri) if lo < c < hi] + [hi]
        cuts = sorted(set(cuts))
        for a, b in zip(cuts[:-1], cuts[1:]):
            s = (b - a) / 2 * gs + (a + b) / 2
            ws = (b - a) / 2 * gws
            pmax = _angle_window(ri, s, eps)  # (s_nodes,)
            phi = pmax[:, None] * gp[None, :]
            wphi = pmax[:, None] * gwp[None, :]
            dist = np.sqrt(np.maximum(ri * ri + s[:, None] ** 2 - 2 * ri * s[:, None] * np.cos(phi), 0.0))
            kern = eta2d(dist, eps) * wphi
            ring = kern.sum(axis=1)  # int eta dphi
            ring_cos = (kern * np.cos(phi)).sum(axis=1)
            u_out[i] += np.sum(ws * s * cone(s) * ring)
            g_out[i] += np.sum(ws * s * cone_gradient(s) * ring_cos)
    return u_out, g_out


def _panels(eps: float, nodes: int):
    """Gauss-Legendre panels on [0, 1 + eps], refined at the tip and the rim."""
    edges = {0.0, 1.0, 1.0 + eps}
    for k in range(1, 5):
        edges.update({eps * k / 4, 1 - eps * k / 4, 1 + eps * k / 4})
    x = 2 * eps
    while x < 0.5:
        edges.add(x)
        edges.add(1 - x)
        x *= 2
    edges.add(0.5)
    edges = sorted(e for e in edges if 0 <= e <= 1 + eps)
    g, w = np.polynomial.legendre.leggauss(nodes)
    return [(a, b, (b - a) / 2 * g + (a + b) / 2, (b - a) / 2 * w) for a, b in zip(edges[:-1], edges[1:])]


def _hessian_density(a, b, theta_nodes: int):
    """Angular integral of |D^2| for a radial map with radial/tangential curvatures a, b."""
    th = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    c2, s2 = np.cos(th) ** 2, np.sin(th) ** 2
    a, b = np.asarray(a)[..., None], np.asarray(b)[..., None]
    val = (a * c2 + b * s2) ** 2 + (a * s2 + b * c2) ** 2 + (a - b) ** 2 * s2 * c2
    return np.sqrt(val).sum(-1) * (2 * np.pi / theta_nodes)


def cone_limit_mass(theta_nodes: int = 4096) -> float:
    """|D^2 u|(R^2) for the cone: rim measure plus absolutely continuous part."""
    th = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    c, s = np.cos(th), np.sin(th)
    return float(2 * np.sqrt(c**4 + c**2 * s**2 + s**4).sum() * 2 * np.pi / theta_nodes)


def _cone_row(eps: float, cfg: StrictConfig) -> dict:
    mass = 0.0
    l2 = 0.0
    sup = 0.0
    for a, b, r, w in _panels(eps, cfg.panel_nodes):
        u, g = mollified_cone(r, eps, cfg.s_nodes, cfg.phi_nodes)
        # radial second derivative from the panel interpolant
        t = (2 * r - (a + b)) / (b - a)
        coef = np.polynomial.legendre.legfit(t, g, len(r) - 1)
        gp = np.polynomial.legendre.legval(t, np.polynomial.legendre.legder(coef)) * 2 / (b - a)
        mass += np.sum(w * r * _hessian_density(gp, g / r, cfg.theta_nodes))
        l2 += np.sum(w * 2 * np.pi * r * (g - cone_gradient(r)) ** 2)
        sup = max(sup, float(np.abs(u - cone(r)).max()))
    u0, _ = mollified_cone(np.array([0.0]), eps, cfg.s_nodes, cfg.phi_nodes)
    sup = max(sup, abs(float(u0[0]) - 1.0))
    return {"eps": eps, "mass": float(mass), "sup_distance": sup, "grad_l2_distance": math.sqrt(l2)}


def cone_2d(cfg: StrictConfig = StrictConfig(), case: str = "cone_2d") -> StrictReport:
    schedule = cfg.eps or _cone_schedule()
    rows = [_cone_row(e, cfg) for e in schedule]
    limit = cone_limit_mass()
    for row in rows:
        row["mass_rel_error"] = abs(row["mass"] - limit) / limit
    if case == "cone_2d":
        verdict = [
            f"|D^2 u_eps| mass -> {limit:.6f} (strict convergence)",
            f"uniform distance at finest eps: {rows[-1]['sup_distance']:.2e} (uniform convergence)",
        ]
    else:
        verdict = [
            f"|D^2 u_eps| mass -> {limit:.6f} (strict convergence)",
            f"L2 distance of gradients at finest eps: {rows[-1]['grad_l2_distance']:.2e}",
        ]
    return StrictReport(case, list(schedule), rows, limit, verdict, asdict(cfg))


def strict_demo(case: str, cfg: StrictConfig = StrictConfig()) -> StrictReport:
    if case == "indicator_1d":
        return indicator_1d(cfg)
    if case in ("cone_2d", "embedding_2d"):
        return cone_2d(cfg, case)
    raise ValueError(f"unknown demo {case!r}")
