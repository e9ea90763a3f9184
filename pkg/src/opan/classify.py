"""Ellipticity, cancellation, weak cancellation and C-ellipticity checks.

Verdict statuses are ``holds_exact``, ``holds_numerical``, ``fails_exact`` and
``fails_numerical``.  Exact statuses always carry a certificate in ``witness``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import count, product
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionMismatchError, ExhaustionError, NotEllipticError, OpanError, SingularSymbolError
from .linalg import canonical_basis, column_space, contains, intersect, nullspace, rank
from .operator import Operator, pseudo_inverse_batch
from .poly import (
    Poly,
    binary_form_gcd,
    dehomogenize,
    format_poly,
    isolate_real_roots,
    multi_indices,
    sturm_count,
    sturm_sequence,
    uadd,
    udeg,
    umul,
    upow,
    uscale,
    usquarefree,
)

HOLDS_EXACT = "holds_exact"
HOLDS_NUMERICAL = "holds_numerical"
FAILS_EXACT = "fails_exact"
FAILS_NUMERICAL = "fails_numerical"


@dataclass(frozen=True)
class ClassifyConfig:
    seed: int = 0
    sphere_samples: int = 10_000
    polishes: int = 50
    margin_tol: float = 1e-6
    max_directions: int = 200
    stability_window: int = 5
    direction_range: int = 20
    quadrature_points: int | None = None  # per-dimension default when None
    weak_tol: float = 1e-8
    c_restarts: int = 40
    c_tol: float = 1e-6


@dataclass(frozen=True)
class Verdict:
    status: str
    margin: float
    witness: dict | None = None

    def __post_init__(self):
        if self.status not in (HOLDS_EXACT, HOLDS_NUMERICAL, FAILS_EXACT, FAILS_NUMERICAL):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status.endswith("exact") and not self.witness:
            raise ValueError("exact verdicts need a certificate")

    @property
    def holds(self) -> bool:
        return self.status.startswith("holds")

    @property
    def exact(self) -> bool:
        return self.status.endswith("exact")


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: tuple[tuple[Fraction, ...], ...]
    certified: bool
    history: tuple[int, ...] = ()
    directions: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if len(self.basis) > self.ambient_dim:
            raise ValueError("too many basis vectors")
        if self.basis and rank([list(v) for v in self.basis]) != len(self.basis):
            raise ValueError("basis vectors are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.basis], dtype=float).reshape(self.dim, self.ambient_dim)


@dataclass(frozen=True)
class LMap:
    matrix: np.ndarray
    quadrature_error: float
    quadrature_points: int
    scale: float
    tensor_indices: tuple[tuple[int, ...], ...]


@dataclass
class ClassificationReport:
    operator: dict
    config: dict
    elliptic: Verdict | None = None
    c_elliptic: Verdict | None = None
    intersection: Subspace | None = None
    canceling: Verdict | None = None
    L: LMap | None = None
    weakly_canceling: Verdict | None = None
    predictions: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


# ----------------------------------------------------------------------------
# sphere sampling helpers


def sphere_points(n: int, count_: int, seed: int = 0) -> np.ndarray:
    """Deterministic, roughly uniform points on S^{n-1}."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = 2 * np.pi * (np.arange(count_) + 0.5) / count_
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if n == 3:
        i = np.arange(count_) + 0.5
        z = 1 - 2 * i / count_
        phi = np.pi * (1 + 5**0.5) * i
        s = np.sqrt(1 - z * z)
        return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    x = np.random.default_rng(seed).standard_normal((count_, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _sigma_min(op: Operator, pts: np.ndarray) -> np.ndarray:
    return np.linalg.svd(op.symbol_batch(pts), compute_uv=False)[..., -1]


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*[x.denominator for x in v])
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints) or 1
    ints = [x // g for x in ints]
    first = next((x for x in ints if x), 1)
    return tuple(-x for x in ints) if first < 0 else tuple(ints)


def _scale_kernel(vs) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(x) for x in _primitive(v)) for v in vs]


# ----------------------------------------------------------------------------
# ellipticity


def normal_determinant(op: Operator) -> Poly:
    """det(B(xi)^T B(xi)) as an exact form of degree 2 k dim_v."""
    from .linalg import poly_det

    g = op.symbol.transpose() @ op.symbol
    return poly_det([list(row) for row in g.entries])


def circle_polynomial(form: Poly) -> tuple:
    """P(t) = form(1 - t^2, 2 t) for a binary form."""
    out: tuple = ()
    a_poly = (Fraction(1), Fraction(0), Fraction(-1))
    b_poly = (Fraction(0), Fraction(2))
    for (a, b), c in form.terms.items():
        out = uadd(out, uscale(umul(upow(a_poly, a), upow(b_poly, b)), c))
    return out


def _exact_failure(op: Operator, point) -> Verdict:
    kern = _scale_kernel(nullspace(op.exact_symbol(point)))
    return Verdict(FAILS_EXACT, 0.0, {"point": tuple(Fraction(x) for x in point), "kernel": kern[0]})


def check_ellipticity(op: Operator, cfg: ClassifyConfig = ClassifyConfig()) -> Verdict:
    if op.dim_w < op.dim_v:
        return _exact_failure(op, (1,) + (0,) * (op.n - 1))
    if op.n == 1:
        r = rank(op.exact_symbol((1,)))
        if r < op.dim_v:
            return _exact_failure(op, (1,))
        margin = float(_sigma_min(op, np.array([1.0]))[()])
        return Verdict(HOLDS_EXACT, margin, {"method": "exact rank of the leading matrix", "rank": r})
    if op.n == 2:
        return _ellipticity_plane(op)
    return _ellipticity_sampled(op, cfg)


def _ellipticity_plane(op: Operator) -> Verdict:
    det = normal_determinant(op)
    p = circle_polynomial(det)
    at_excluded = det.evaluate((Fraction(-1), Fraction(0)))
    if udeg(p) <= 0 and not p:
        # det vanishes identically
        return _exact_failure(op, (1, 0))
    roots = isolate_real_roots(usquarefree(p))
    if not roots and at_excluded != 0:
        seq = sturm_sequence(usquarefree(p))
        theta = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        margin = float(_sigma_min(op, np.stack([np.cos(theta), np.sin(theta)], 1)).min())
        return Verdict(
            HOLDS_EXACT,
            margin,
            {
                "method": "sturm",
                "normal_determinant": format_poly(det),
                "real_roots": sturm_count(seq),
                "value_at_(-1,0)": at_excluded,
            },
        )
    if at_excluded == 0 and not any(r[0] == "exact" for r in roots):
        return _exact_failure(op, (1, 0))
    exact_roots = sorted((r[1] for r in roots if r[0] == "exact"), key=abs)
    if exact_roots:
        t = exact_roots[0]
        return _exact_failure(op, _primitive((1 - t * t, 2 * t)))
    _, a, b = roots[0]
    return Verdict(
        FAILS_EXACT,
        0.0,
        {
            "method": "sturm",
            "normal_determinant": format_poly(det),
            "root_interval_t": (a, b),
            "direction": "(1 - t^2, 2 t)",
        },
    )


def _ellipticity_sampled(op: Operator, cfg: ClassifyConfig) -> Verdict:
    pts = sphere_points(op.n, cfg.sphere_samples, cfg.seed)
    sig = _sigma_min(op, pts)
    best = np.argsort(sig, kind="stable")[: cfg.polishes]

    def f(x):
        nrm = np.linalg.norm(x)
        if nrm == 0:
            return np.inf
        return float(_sigma_min(op, x / nrm))

    found_min, arg = float(sig.min()), pts[int(np.argmin(sig))]
    for idx in best:
        res = minimize(f, pts[idx], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * op.n})
        if res.fun < found_min:
            found_min, arg = float(res.fun), res.x / np.linalg.norm(res.x)
    found_max = float(sig.max())
    if found_min >= cfg.margin_tol * found_max:
        return Verdict(HOLDS_NUMERICAL, found_min, {"method": "sphere sampling + local polish", "samples": len(pts)})
    for limit in (1, 2, 4, 8, 16, 100, 1000):
        cand = tuple(Fraction(float(x)).limit_denominator(limit) for x in arg)
        if any(cand) and rank(op.exact_symbol(cand)) < op.dim_v:
            return _exact_failure(op, _primitive(cand))
    return Verdict(FAILS_NUMERICAL, found_min, {"point": tuple(float(x) for x in arg), "sigma_min": found_min})


# ----------------------------------------------------------------------------
# intersection of images


def _augmented_minors(op: Operator, w: Sequence[Fraction]) -> list[Poly]:
    """All (dim_v+1)-minors of [B(xi) | w], via the dim_v-minors of B."""
    d = op.dim_v
    minors = op.full_minors
    out = []
    rows_all = range(op.dim_w)
    from itertools import combinations

    for rows in combinations(rows_all, d + 1):
        total = Poly(op.n)
        for pos, r in enumerate(rows):
            if w[r] == 0:
                continue
            sub = rows[:pos] + rows[pos + 1 :]
            term = minors[sub] * w[r]
            # cofactor sign for entry (pos, d) in a (d+1)x(d+1) matrix
            total = total + term if (pos + d) % 2 == 0 else total - term
        out.append(total)
    return out


def _small_directions(n: int):
    """Nonzero integer vectors in order of growing max-norm (deterministic)."""
    for radius in count(1):
        for v in product(range(-radius, radius + 1), repeat=n):
            if max(abs(x) for x in v) == radius:
                yield v


def compute_intersection(op: Operator, cfg: ClassifyConfig = ClassifyConfig()) -> Subspace:
    """The subspace of W common to every im B(xi), certified exactly."""
    dim = op.dim_w
    rng = np.random.default_rng(cfg.seed)
    basis = [tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)]
    history: list[int] = []
    directions: list[tuple[int, ...]] = []

    def cut(direction):
        nonlocal basis
        mat = op.exact_symbol(direction)
        if rank(mat) < op.dim_v:
            kern = _scale_kernel(nullspace(mat))
            raise NotEllipticError(
                f"symbol loses rank at {direction}", {"point": tuple(direction), "kernel": kern[0]}
            )
        basis = intersect(basis, column_space(mat), dim)
        history.append(len(basis))
        directions.append(tuple(direction))

    stable = 0
    while basis and stable < cfg.stability_window:
        if len(directions) >= cfg.max_directions:
            raise ExhaustionError(
                "direction budget exhausted before the dimension stabilised",
                Subspace(dim, tuple(basis), False, tuple(history), tuple(directions)),
            )
        v = tuple(int(x) for x in rng.integers(-cfg.direction_range, cfg.direction_range + 1, op.n))
        if not any(v):
            continue
        before = len(basis)
        cut(v)
        stable = stable + 1 if len(basis) == before else 0

    # certification: every minor of [B(xi) | w] must vanish identically
    while basis:
        bad = None
        for w in basis:
            for m in _augmented_minors(op, w):
                if not m.is_zero():
                    bad = m
                    break
            if bad is not None:
                break
        if bad is None:
            break
        for v in _small_directions(op.n):
            if bad.evaluate(v) != 0:
                before = len(basis)
                cut(v)
                if len(basis) >= before:
                    raise AssertionError("certification step failed to shrink the subspace")
                break
    return Subspace(dim, tuple(canonical_basis(basis)), True, tuple(history), tuple(directions))


# ----------------------------------------------------------------------------
# L map


def _default_points(n: int) -> int:
    return {1: 2, 2: 256, 3: 64}.get(n, 20_000)


def sphere_rule(n: int, points: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating over S^{n-1}; antipodally symmetric."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        t = 2 * np.pi * np.arange(points) / points
        return np.stack([np.cos(t), np.sin(t)], 1), np.full(points, 2 * np.pi / points)
    if n == 3:
        m = max(points // 2, 1)
        z, wz = np.polynomial.legendre.leggauss(m)
        phi = 2 * np.pi * np.arange(points) / points
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        s = np.sqrt(1 - zz**2)
        nodes = np.stack([s * np.cos(pp), s * np.sin(pp), zz], -1).reshape(-1, 3)
        weights = np.repeat(wz, points) * (2 * np.pi / points)
        return nodes, weights
    half = np.random.default_rng(seed).standard_normal((points // 2, n))
    half /= np.linalg.norm(half, axis=1, keepdims=True)
    nodes = np.concatenate([half, -half])
    area = 2 * np.pi ** (n / 2) / math.gamma(n / 2)
    return nodes, np.full(len(nodes), area / len(nodes))


def _L_at(op: Operator, points: int, seed: int) -> tuple[np.ndarray, float]:
    nodes, weights = sphere_rule(op.n, points, seed)
    pinv = pseudo_inverse_batch(op, nodes)  # (q, dim_v, dim_w)
    gammas = multi_indices(op.n, op.k - op.n)
    mono = np.stack([np.prod(nodes ** np.array(g), axis=1) for g in gammas], 1)  # (q, m)
    integrand = np.einsum("qvw,qm->qvmw", pinv, mono).reshape(len(nodes), -1, op.dim_w)
    mat = np.einsum("q,qrw->rw", weights, integrand)
    scale = float(np.dot(weights, np.linalg.norm(pinv, ord=2, axis=(1, 2))))
    return mat, scale


def compute_L(op: Operator, cfg: ClassifyConfig = ClassifyConfig()) -> LMap:
    """Sphere integral of B^dagger(xi) w (x) xi^(k-n), multiset tensor basis."""
    if op.k < op.n:
        raise DimensionMismatchError(f"L is defined for k >= n (here k={op.k}, n={op.n})")
    pts = cfg.quadrature_points or _default_points(op.n)
    try:
        mat, scale = _L_at(op, pts, cfg.seed)
        coarse, _ = _L_at(op, max(pts // 2, 2), cfg.seed)
    except SingularSymbolError as exc:
        raise NotEllipticError(str(exc), {"point": exc.point}) from exc
    err = float(np.linalg.norm(mat - coarse))
    return LMap(mat, err, pts, scale, tuple(multi_indices(op.n, op.k - op.n)))


# ----------------------------------------------------------------------------
# cancellation verdicts


def canceling_verdict(sub: Subspace) -> Verdict:
    payload = {"intersection_dim": sub.dim, "basis": list(sub.basis), "certified": sub.certified}
    if sub.dim == 0:
        return Verdict(HOLDS_EXACT if sub.certified else HOLDS_NUMERICAL, 0.0, payload)
    return Verdict(FAILS_EXACT if sub.certified else FAILS_NUMERICAL, float(sub.dim), payload)


def check_weak_canceling(op: Operator, sub: Subspace, lmap: LMap | None, tol: float = 1e-8) -> Verdict | None:
    """None when the condition does not apply (order below dimension, I nonzero)."""
    if sub.dim == 0:
        return Verdict(HOLDS_EXACT, 0.0, {"intersection_dim": 0, "vacuous": True})
    if lmap is None:
        return None
    worst, worst_w = -1.0, None
    eps = np.finfo(float).eps
    for w in sub.basis:
        wf = np.array([float(x) for x in w])
        ratio = float(np.linalg.norm(lmap.matrix @ wf) / (lmap.scale * np.linalg.norm(wf) + eps))
        if ratio > worst:
            worst, worst_w = ratio, w
    if worst <= tol:
        return Verdict(HOLDS_NUMERICAL, worst, {"max_relative_norm": worst, "quadrature_error": lmap.quadrature_error})
    return Verdict(FAILS_NUMERICAL, worst, {"w": worst_w, "relative_norm": worst})


# ----------------------------------------------------------------------------
# C-ellipticity


def _complex_kernel(mat: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(mat)
    v = vh[-1].conj()
    pivot = v[np.nonzero(np.abs(v) > 1e-9 * np.abs(v).max())[0][-1]]
    return v / pivot


def _clean(z: complex, digits: int = 12) -> complex:
    return complex(round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0)


def check_c_ellipticity(op: Operator, cfg: ClassifyConfig = ClassifyConfig()) -> Verdict:
    if op.dim_w < op.dim_v:
        return _exact_failure(op, (1,) + (0,) * (op.n - 1))
    if op.n == 1:
        v = check_ellipticity(op, cfg)
        return v
    if op.n == 2:
        return _c_ellipticity_plane(op)
    return _c_ellipticity_sampled(op, cfg)


def _complex_margin_plane(op: Operator, m: int = 64) -> float:
    a = np.linspace(0, np.pi / 2, m)
    phi = np.linspace(0, 2 * np.pi, 2 * m, endpoint=False)
    aa, pp = np.meshgrid(a, phi, indexing="ij")
    pts = np.stack([np.cos(aa), np.sin(aa) * np.exp(1j * pp)], -1).reshape(-1, 2)
    return float(_sigma_min(op, pts).min())


def _c_ellipticity_plane(op: Operator) -> Verdict:
    minors = [m for m in op.full_minors.values() if not m.is_zero()]
    if not minors:
        return _exact_failure(op, (1, 0))
    g = binary_form_gcd(minors)
    if g.degree() == 0:
        return Verdict(
            HOLDS_EXACT,
            _complex_margin_plane(op),
            {"method": "gcd of maximal minors", "gcd": format_poly(g), "minors": len(minors)},
        )
    u, _ = dehomogenize(g)
    if udeg(u) >= 1:
        roots = np.roots([float(c) for c in reversed(usquarefree(u))])
        # most negative imaginary part; ties broken by real part for determinism
        x = sorted(roots, key=lambda z: (round(z.imag, 9), round(z.real, 9)))[0]
        xi = np.array([1.0, 1.0 / x] if abs(x) > 1e-12 else [0.0, 1.0], dtype=complex)
    else:
        xi = np.array([1.0, 0.0], dtype=complex)  # only x2_power > 0 remains
    mat = op.symbol_batch(xi)
    v = _complex_kernel(mat)
    residual = float(np.linalg.norm(mat @ v))
    return Verdict(
        FAILS_EXACT,
        0.0,
        {
            "factor": format_poly(g),
            "xi": tuple(_clean(z) for z in xi),
            "kernel": tuple(_clean(z) for z in v),
            "residual": residual,
        },
    )


def _c_ellipticity_sampled(op: Operator, cfg: ClassifyConfig) -> Verdict:
    n = op.n
    rng = np.random.default_rng(cfg.seed)

    def to_point(x):
        z = x[:n] + 1j * x[n:]
        return z / np.linalg.norm(z)

    def f(x):
        b = op.symbol_batch(to_point(x))
        return float(np.linalg.eigvalsh(b.conj().T @ b)[0])

    starts = rng.standard_normal((cfg.c_restarts, 2 * n))
    sig_max = np.linalg.svd(op.symbol_batch(np.array([to_point(s) for s in starts])), compute_uv=False)[:, 0]
    scale = float(np.median(sig_max))
    best, best_x = np.inf, None
    for s in starts:
        res = minimize(f, s, method="BFGS", options={"gtol": 1e-12})
        if res.fun < best:
            best, best_x = float(res.fun), res.x
    sigma = math.sqrt(max(best, 0.0))
    if sigma >= cfg.c_tol * scale:
        return Verdict(HOLDS_NUMERICAL, sigma, {"method": "complex sphere minimisation", "restarts": cfg.c_restarts})
    z = to_point(best_x)
    z = z / z[np.argmax(np.abs(z))]
    mat = op.symbol_batch(z)
    v = _complex_kernel(mat)
    return Verdict(
        FAILS_NUMERICAL,
        sigma,
        {
            "xi": tuple(_clean(c, 6) for c in z),
            "kernel": tuple(_clean(c, 6) for c in v),
            "residual": float(np.linalg.norm(mat @ v)),
        },
    )


# ----------------------------------------------------------------------------
# full classification


def predictions(op: Operator, rep: ClassificationReport) -> list[str]:
    """Function-space behaviour implied by the verdicts (order equal to dimension only)."""
    if op.k != op.n or rep.elliptic is None or not rep.elliptic.holds:
        return []
    out = []
    if rep.canceling is not None and rep.canceling.holds:
        out.append("BV^B maps continuous")
    elif rep.weakly_canceling is not None and rep.weakly_canceling.holds:
        out.append("BV^B in L-infinity only (bounded, not continuous)")
    # interior continuity is a prerequisite; this also excludes n = 1
    if rep.c_elliptic is not None and rep.c_elliptic.holds and rep.canceling is not None and rep.canceling.holds:
        out.append("continuous up to boundary on cubes")
    return out


def classify(op: Operator, cfg: ClassifyConfig = ClassifyConfig()) -> ClassificationReport:
    rep = ClassificationReport(operator=op.summary(), config=asdict(cfg))
    rep.elliptic = check_ellipticity(op, cfg)
    rep.c_elliptic = check_c_ellipticity(op, cfg)
    if rep.elliptic.holds:
        try:
            rep.intersection = compute_intersection(op, cfg)
        except ExhaustionError as exc:
            rep.intersection = exc.subspace
            rep.errors.append(f"intersection: {exc}")
        except NotEllipticError as exc:
            rep.errors.append(f"intersection: {exc}")
        if rep.intersection is not None:
            rep.canceling = canceling_verdict(rep.intersection)
            if op.k >= op.n:
                try:
                    rep.L = compute_L(op, cfg)
                except OpanError as exc:
                    rep.errors.append(f"L: {exc}")
            rep.weakly_canceling = check_weak_canceling(op, rep.intersection, rep.L, cfg.weak_tol)
    else:
        rep.errors.append("operator is not elliptic; cancellation checks skipped")
    rep.predictions = predictions(op, rep)
    return rep


def membership_minor(op: Operator, sub: Subspace, w: Sequence[Fraction]) -> Poly | None:
    """None when w lies in the certified intersection, else a nonvanishing minor."""
    w = tuple(Fraction(x) for x in w)
    if contains(sub.basis, w):
        return None
    for m in _augmented_minors(op, w):
        if not m.is_zero():
            return m
    return Poly.constant(op.n, 1)
