"""JSON, text and CSV emission for reports.

JSON output is byte-deterministic: keys are sorted, floats use ``repr``,
rationals become ``{"decimal": ..., "exact": "p/q"}`` and complex numbers
become strings.  Large sampled fields are never embedded.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .grid import GridField

DECIMAL_DIGITS = 17


def rational(x: Fraction) -> dict:
    x = Fraction(x)
    exact = str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return {"decimal": _decimal(x), "exact": exact}


def _decimal(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return format(float(x), f".{DECIMAL_DIGITS}g")


def _complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def _float(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj):
    """Recursively convert reports and their payloads to plain JSON values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _complex(obj)
    if isinstance(obj, GridField):
        return {"n": obj.n, "dim": obj.dim, "points_per_axis": obj.points_per_axis, "box_halfwidth": obj.box_halfwidth}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if hasattr(obj, "dim") and "basis" in out:
            out["dim"] = obj.dim
        return out
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    return str(k)


def envelope(kind: str, report, seed: int | None = None) -> dict:
    return {"artifact_version": __version__, "kind": kind, "seed": seed, "report": to_jsonable(report)}


def emit_json(kind: str, report, seed: int | None = None) -> bytes:
    return (json.dumps(envelope(kind, report, seed), sort_keys=True, indent=2, allow_nan=False) + "\n").encode()


# ----------------------------------------------------------------------------
# text summaries


def _verdict_line(label: str, v) -> str:
    if v is None:
        return f"{label:18s} n/a"
    return f"{label:18s} {v.status} (margin {v.margin:.3g})"


def classification_text(rep) -> str:
    op = rep.operator
    lines = [
        f"operator {op.get('name') or '<unnamed>'}: n={op['n']} k={op['k']} V=R^{op['dim_v']} W=R^{op['dim_w']}",
        _verdict_line("elliptic", rep.elliptic),
        _verdict_line("C-elliptic", rep.c_elliptic),
    ]
    if rep.intersection is not None:
        cert = "certified" if rep.intersection.certified else "NOT certified"
        lines.append(f"{'intersection I':18s} dim {rep.intersection.dim} ({cert})")
        for v in rep.intersection.basis:
            lines.append(" " * 19 + "(" + ", ".join(rational(x)["exact"] for x in v) + ")")
    lines.append(_verdict_line("canceling", rep.canceling))
    lines.append(_verdict_line("weakly canceling", rep.weakly_canceling))
    if rep.L is not None:
        lines.append(f"{'L map':18s} norm {np.linalg.norm(rep.L.matrix, 2):.3e}, quadrature error {rep.L.quadrature_error:.1e}")
    for w in (rep.c_elliptic, rep.elliptic):
        if w is not None and not w.holds and w.witness:
            lines.append("witness: " + json.dumps(to_jsonable(w.witness), sort_keys=True))
    lines.append("predicted behaviour:")
    lines.extend(f"  - {p}" for p in rep.predictions) if rep.predictions else lines.append("  (none)")
    for e in rep.errors:
        lines.append(f"note: {e}")
    return "\n".join(lines) + "\n"


def generic_text(kind: str, report) -> str:
    data = to_jsonable(report)
    lines = [f"{kind} report"]
    for key in sorted(data) if isinstance(data, dict) else []:
        val = data[key]
        if isinstance(val, (list, dict)) and len(json.dumps(val)) > 200:
            lines.append(f"{key}: <{len(val)} entries>")
        else:
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def emit_report(report, format: str = "json", kind: str | None = None, seed: int | None = None) -> bytes:
    from .classify import ClassificationReport

    kind = kind or ("classification" if isinstance(report, ClassificationReport) else type(report).__name__)
    if format == "json":
        if seed is None and isinstance(getattr(report, "config", None), dict):
            seed = report.config.get("seed")
        return emit_json(kind, report, seed)
    if format == "text":
        if isinstance(report, ClassificationReport):
            return classification_text(report).encode()
        return generic_text(kind, report).encode()
    raise ValueError(f"unknown format {format!r}")


# ----------------------------------------------------------------------------
# CSV tables


def write_csv(rows, path: str | Path, columns=None) -> Path:
    """One row per dict; floats keep full precision."""
    path = Path(path)
    rows = list(rows)
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r.get(c)) for c in columns])
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(x) for x in v)
    return str(v)
