"""Built-in operators with their known classifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dsl import parse_operator
from .operator import Operator, compose
from .poly import multi_indices


@dataclass(frozen=True)
class Expectation:
    value: object
    source: str  # provenance: "trivial", "literature" or "oracle: ..."


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    operator: Operator
    expected: dict[str, Expectation] = field(default_factory=dict)
    note: str = ""


def _derivatives_of_order(n: int, k: int, name: str) -> Operator:
    betas = multi_indices(n, k)
    coeffs = {}
    for row, beta in enumerate(betas):
        mat = [[Fraction(0)] for _ in betas]
        mat[row][0] = Fraction(1)
        coeffs[beta] = mat
    return Operator(n, k, 1, len(betas), coeffs, name)


_DSL = {
    "grad_n2": "dim 2 order 1 from 1 to 2 [ d1 ; d2 ]",
    "dn_n1": "dim 1 order 1 from 1 to 1 [ d1 ]",
    "laplace_n2": "dim 2 order 2 from 1 to 1 [ d1^2 + d2^2 ]",
    "div_curl_n2": "dim 2 order 1 from 2 to 2 [ d1, d2 ; -d2, d1 ]",
    "div_curl_n3": "dim 3 order 1 from 3 to 4 [ d1, d2, d3 ; 0, -d3, d2 ; d3, 0, -d1 ; -d2, d1, 0 ]",
    "mixed_partials_n2": "dim 2 order 2 from 1 to 1 [ d1 d2 ]",
    "example_ab": "dim 2 order 2 from 1 to 2 [ d1^2 + d2^2 ; d1^2 + 2 d2^2 ]",
    "example_aa": "dim 2 order 2 from 1 to 2 [ d1^2 + d2^2 ; d1^2 + d2^2 ]",
    # (d1 + i d2)^2 acting on u1 + i u2, written on (u1, u2)
    "bitsadze_n2": "dim 2 order 2 from 2 to 2 [ d1^2 - d2^2, -2 d1 d2 ; 2 d1 d2, d1^2 - d2^2 ]",
}

_LAP3_ID4 = "dim 3 order 2 from 4 to 4 [ " + " ; ".join(
    ", ".join("d1^2 + d2^2 + d3^2" if i == j else "0" for j in range(4)) for i in range(4)
) + " ]"


def _operators() -> dict[str, Operator]:
    ops = {}
    for key, src in _DSL.items():
        op = parse_operator(src)
        ops[key] = Operator(op.n, op.k, op.dim_v, op.dim_w, op.coeffs, key)
    ops["dn_n2"] = _derivatives_of_order(2, 2, "dn_n2")
    ops["dn_n3"] = _derivatives_of_order(3, 3, "dn_n3")
    ops["lap_div_curl_n3"] = compose(parse_operator(_LAP3_ID4), ops["div_curl_n3"], "lap_div_curl_n3")
    return ops


def _e(value, source="literature"):
    return Expectation(value, source)


_EXPECTED = {
    "grad_n2": {"elliptic": _e("holds", "trivial"), "canceling": _e("holds", "trivial"), "intersection_dim": _e(0, "trivial")},
    "dn_n1": {"elliptic": _e("holds", "trivial"), "canceling": _e("fails"), "weakly_canceling": _e("holds"), "intersection_dim": _e(1, "trivial")},
    "dn_n2": {"elliptic": _e("holds", "trivial"), "canceling": _e("holds"), "c_elliptic": _e("holds", "oracle: gcd of minors is 1")},
    "dn_n3": {"elliptic": _e("holds", "trivial"), "canceling": _e("holds")},
    "laplace_n2": {
        "elliptic": _e("holds", "trivial"),
        "canceling": _e("fails", "trivial"),
        "intersection_dim": _e(1, "trivial"),
        "weakly_canceling": _e("fails", "oracle: L = 2 pi"),
    },
    "div_curl_n2": {"elliptic": _e("holds"), "c_elliptic": _e("fails"), "c_elliptic_factor": _e("xi1^2 + xi2^2")},
    "div_curl_n3": {"elliptic": _e("holds", "trivial"), "intersection_dim": _e(1, "oracle: exact intersection at random directions")},
    "lap_div_curl_n3": {
        "elliptic": _e("holds"),
        "canceling": _e("fails"),
        "intersection_dim": _e(1, "oracle: exact intersection at random directions"),
        "weakly_canceling": _e("holds"),
        "c_elliptic": _e("fails", "oracle: complex kernel at (1, i, 0)"),
    },
    "mixed_partials_n2": {"elliptic": _e("fails", "trivial: symbol vanishes at (1, 0)")},
    "example_ab": {"elliptic": _e("holds"), "c_elliptic": _e("holds")},
    "example_aa": {"c_elliptic": _e("fails", "oracle: symbol vanishes at (i, 1)"), "c_elliptic_factor": _e("xi1^2 + xi2^2", "oracle")},
    "bitsadze_n2": {
        "elliptic": _e("holds", "oracle: det = |xi|^4"),
        "canceling": _e("fails", "oracle: B(xi) invertible for xi != 0"),
        "intersection_dim": _e(2, "oracle: B(xi) invertible for xi != 0"),
        "weakly_canceling": _e("holds", "oracle: L = 0 by quadrature"),
        "c_elliptic": _e("fails", "oracle: kernel at (1, i)"),
    },
}


def gallery() -> list[GalleryEntry]:
    ops = _operators()
    return [GalleryEntry(key, ops[key], _EXPECTED[key]) for key in _EXPECTED]


def gallery_dict() -> dict[str, GalleryEntry]:
    return {e.id: e for e in gallery()}


def get(name: str) -> Operator:
    try:
        return gallery_dict()[name].operator
    except KeyError:
        raise KeyError(f"unknown gallery id {name!r}") from None


def actual_fields(report) -> dict[str, object]:
    """Project a classification report onto the comparable expectation keys."""

    def short(v):
        return None if v is None else v.status.split("_")[0]

    out = {
        "elliptic": short(report.elliptic),
        "c_elliptic": short(report.c_elliptic),
        "canceling": short(report.canceling),
        "weakly_canceling": short(report.weakly_canceling),
        "intersection_dim": None if report.intersection is None else report.intersection.dim,
    }
    w = report.c_elliptic.witness if report.c_elliptic is not None else None
    out["c_elliptic_factor"] = w.get("factor") if isinstance(w, dict) else None
    return out


def check_entry(entry: GalleryEntry, report) -> dict[str, tuple[object, object, bool]]:
    actual = actual_fields(report)
    return {key: (exp.value, actual.get(key), actual.get(key) == exp.value) for key, exp in entry.expected.items()}
