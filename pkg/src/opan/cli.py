"""``opan`` command-line entry point.

Exit codes: 0 success, 1 expectation mismatch, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .classify import ClassifyConfig, classify, compute_intersection
from .errors import (
    BandError,
    DimensionMismatchError,
    DSLSyntaxError,
    MembershipError,
    OpanError,
    PreconditionError,
    ShapeMismatchError,
    UnknownExponentError,
    WitnessInvalidError,
    ZeroOperatorError,
)
from .report import emit_json, emit_report, generic_text, write_csv

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

_INPUT_ERRORS = (
    BandError,
    DSLSyntaxError,
    ZeroOperatorError,
    DimensionMismatchError,
    MembershipError,
    ShapeMismatchError,
    UnknownExponentError,
    PreconditionError,
    WitnessInvalidError,
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    gallery_id: str | None = None
    op_path: str | None = None
    seed: int = 0
    samples: int | None = None
    tol: float | None = None
    grid: int | None = None
    out: str | None = None
    json: bool = False
    check: bool = False
    w: str | None = None
    which: str = "linfty"
    case: str = "boundary"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opan", description="Classify and probe constant-coefficient differential operators.")
    p.add_argument("--version", action="version", version=f"opan {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, operator=True):
        if operator:
            src = sp.add_mutually_exclusive_group()
            src.add_argument("--gallery", dest="gallery_id", metavar="ID", help="built-in operator id")
            src.add_argument("--op", dest="op_path", metavar="PATH", help="operator DSL file")
        sp.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--grid", type=int, default=None)
        sp.add_argument("--out", metavar="DIR", default=None, help="directory for JSON/CSV/grid files")

    sp = sub.add_parser("classify", help="ellipticity, cancellation and C-ellipticity verdicts")
    common(sp)
    sp = sub.add_parser("kernel", help="windowed fundamental solution and its log/profile split")
    common(sp)
    sp.add_argument("--w", default=None, help="comma-separated source vector (default: first basis vector of I, else e1)")
    sp = sub.add_parser("verify", help="inequality and modulus-of-continuity experiments")
    common(sp)
    sp.add_argument("--which", default="linfty", choices=["vs_j", "linfty", "cube_bound", "modulus"])
    sp = sub.add_parser("demo", help="strict convergence and boundary demos")
    common(sp)
    sp.add_argument("--case", default="boundary", choices=["indicator_1d", "cone_2d", "embedding_2d", "boundary"])
    sp = sub.add_parser("gallery", help="list built-in operators or check their expected classification")
    common(sp, operator=False)
    sp.add_argument("--check", action="store_true", help="classify every entry and compare with expectations")
    return p


def _load_operator(cfg: CliConfig, required: bool = True):
    from . import gallery
    from .dsl import parse_operator

    if cfg.gallery_id:
        try:
            return gallery.get(cfg.gallery_id)
        except KeyError:
            raise UsageError(f"unknown gallery id {cfg.gallery_id!r}; see 'opan gallery'") from None
    if cfg.op_path:
        path = Path(cfg.op_path)
        if not path.is_file():
            raise UsageError(f"operator file not found: {path}")
        return parse_operator(path.read_text())
    if required:
        raise UsageError("an operator is required: use --gallery ID or --op PATH")
    return None


def _classify_cfg(cfg: CliConfig) -> ClassifyConfig:
    c = ClassifyConfig(seed=cfg.seed)
    if cfg.samples is not None:
        c = replace(c, sphere_samples=cfg.samples)
    if cfg.tol is not None:
        c = replace(c, margin_tol=cfg.tol)
    return c


def _emit(cfg: CliConfig, kind: str, report, text: str | None = None, out=sys.stdout) -> None:
    payload = emit_json(kind, report, cfg.seed)
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        (Path(cfg.out) / f"{kind}.json").write_bytes(payload)
    if cfg.json:
        out.write(payload.decode())
    else:
        out.write(text if text is not None else generic_text(kind, report))


# ----------------------------------------------------------------------------
# subcommands


def cmd_classify(cfg: CliConfig, out) -> int:
    from . import gallery

    op = _load_operator(cfg)
    rep = classify(op, _classify_cfg(cfg))
    _emit(cfg, "classification", rep, emit_report(rep, "text").decode(), out)
    if cfg.gallery_id:
        entry = gallery.gallery_dict()[cfg.gallery_id]
        bad = {k: v for k, v in gallery.check_entry(entry, rep).items() if not v[2]}
        if bad:
            for k, (exp, act, _) in bad.items():
                print(f"mismatch {cfg.gallery_id}.{k}: expected {exp!r}, got {act!r}", file=sys.stderr)
            return EXIT_MISMATCH
    return EXIT_OK


def _parse_vector(text: str, dim: int) -> tuple:
    from fractions import Fraction

    try:
        vals = tuple(Fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse vector {text!r}") from None
    if len(vals) != dim:
        raise UsageError(f"vector has {len(vals)} entries, expected {dim}")
    return vals


def cmd_kernel(cfg: CliConfig, out) -> int:
    from .kernel import DecomposeConfig, KernelConfig, decompose_kernel, discontinuity_witness, solve_dirac
    from .kernel import write_oscillation_csv, write_profile_csv

    op = _load_operator(cfg)
    ccfg = _classify_cfg(cfg)
    sub = compute_intersection(op, ccfg)
    if cfg.w:
        w = _parse_vector(cfg.w, op.dim_w)
    elif sub.dim:
        w = sub.basis[0]
    else:
        w = tuple(1 if i == 0 else 0 for i in range(op.dim_w))
    kcfg = KernelConfig(grid=cfg.grid)
    fld = solve_dirac(op, w, kcfg, intersection=sub, classify_cfg=ccfg)
    model = decompose_kernel(fld, op, w, DecomposeConfig())
    wit = discontinuity_witness(model, cfg.tol if cfg.tol is not None else 1e-3)
    summary = {
        "operator": op.summary(),
        "w": list(w),
        "grid": fld.points_per_axis,
        "box_halfwidth": fld.box_halfwidth,
        "window": fld.meta.get("window"),
        "log_vector": model.log_vector,
        "log_coefficient": model.log_coefficient,
        "fit_residual": model.fit_residual,
        "witness": wit,
    }
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        fld.save(d / "kernel_field.opgf")
        write_oscillation_csv(wit, d / "oscillation.csv")
        write_profile_csv(model, d / "profile.csv")
    text = (
        f"kernel for {op.name or '<unnamed>'} with w = {tuple(str(x) for x in w)} on {fld.points_per_axis}^{op.n}\n"
        f"log vector b = {np.array2string(np.asarray(model.log_vector), precision=6)}\n"
        f"witness kind: {wit.kind} (log norm {wit.log_norm:.3e}, profile oscillation {wit.profile_oscillation:.4g})\n"
        + "".join(f"  oscillation at r={r:g}: {o:.6g}\n" for r, o in wit.oscillation_by_radius)
    )
    _emit(cfg, "kernel", summary, text, out)
    return EXIT_OK


def cmd_verify(cfg: CliConfig, out) -> int:
    from .estimates import FieldConfig, VerifyConfig, modulus_suite, verify_inequalities

    op = _load_operator(cfg)
    ccfg = _classify_cfg(cfg)
    if cfg.which == "modulus":
        count = cfg.samples or 20
        fcfg = FieldConfig(grid=cfg.grid or FieldConfig().grid)
        c_fit, curves = modulus_suite(op, range(cfg.seed, cfg.seed + count), fcfg)
        report = {"C_fit": c_fit, "curves": curves, "note": "empirical fit over seeded fields; not a proof"}
        rows = [
            {"seed": cfg.seed + i, "radius": r, "lhs": a, "rhs": b}
            for i, cv in enumerate(curves)
            for r, a, b in zip(cv.radii, cv.lhs, cv.rhs)
        ]
        text = f"modulus of continuity: C_fit = {c_fit:.6g} over {count} fields\n"
    else:
        vcfg = VerifyConfig(num_fields=cfg.samples or 100, seed=cfg.seed, grid=cfg.grid)
        report = verify_inequalities(op, cfg.which, vcfg, ccfg)
        rows = report.rows
        text = f"{report.inequality}: max ratio {report.max_ratio:.6g} over {len(rows)} fields ({report.note})\n"
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        write_csv(rows, Path(cfg.out) / f"verify_{cfg.which}.csv")
    _emit(cfg, f"verify_{cfg.which}", report, text, out)
    return EXIT_OK


def cmd_demo(cfg: CliConfig, out) -> int:
    if cfg.case == "boundary":
        from .estimates import BoundaryConfig, boundary_counterexample

        op = _load_operator(cfg)
        bcfg = BoundaryConfig(grid=cfg.grid) if cfg.grid else BoundaryConfig()
        res = boundary_counterexample(op, cfg=bcfg)
        if cfg.out:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            res.field.save(Path(cfg.out) / "boundary_field.opgf")
        rep = res.report
        text = generic_text("boundary", rep)
        _emit(cfg, "demo_boundary", rep, text, out)
        return EXIT_OK
    from .strict import StrictConfig, strict_demo

    rep = strict_demo(cfg.case, StrictConfig())
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        write_csv(rep.rows, Path(cfg.out) / f"demo_{cfg.case}.csv")
    keys = [k for k in rep.rows[0] if k != "grid"]
    text = f"{rep.case}\n" + "  ".join(f"{k:>16s}" for k in keys) + "\n"
    text += "".join("  ".join(f"{row[k]:16.6g}" for k in keys) + "\n" for row in rep.rows)
    text += "".join(f"- {v}\n" for v in rep.verdict)
    _emit(cfg, f"demo_{cfg.case}", rep, text, out)
    return EXIT_OK


def cmd_gallery(cfg: CliConfig, out) -> int:
    from . import gallery
    from .dsl import format_operator

    entries = gallery.gallery()
    if not cfg.check:
        listing = [
            {"id": e.id, "n": e.operator.n, "k": e.operator.k, "expected": {k: v.value for k, v in e.expected.items()}, "note": e.note}
            for e in entries
        ]
        text = "".join(f"{e.id:18s} n={e.operator.n} k={e.operator.k}  {e.note}\n" for e in entries)
        if not cfg.json:
            text += "\n" + "\n".join(format_operator(e.operator) for e in entries)
        _emit(cfg, "gallery", listing, text, out)
        return EXIT_OK
    ccfg = _classify_cfg(cfg)
    results = []
    ok_all = True
    for e in entries:
        rep = classify(e.operator, ccfg)
        checks = gallery.check_entry(e, rep)
        ok = all(v[2] for v in checks.values())
        ok_all &= ok
        results.append({"id": e.id, "ok": ok, "fields": {k: {"expected": a, "actual": b, "ok": c} for k, (a, b, c) in checks.items()}})
        for k, (a, b, c) in checks.items():
            if not c:
                print(f"mismatch {e.id}.{k}: expected {a!r}, got {b!r}", file=sys.stderr)
    text = "".join(f"{'ok ' if r['ok'] else 'BAD'} {r['id']}\n" for r in results)
    text += f"{sum(r['ok'] for r in results)}/{len(results)} entries match\n"
    _emit(cfg, "gallery_check", results, text, out)
    return EXIT_OK if ok_all else EXIT_MISMATCH


COMMANDS = {"classify": cmd_classify, "kernel": cmd_kernel, "verify": cmd_verify, "demo": cmd_demo, "gallery": cmd_gallery}


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    fields = set(CliConfig.__dataclass_fields__)
    cfg = CliConfig(**{k: v for k, v in vars(ns).items() if k in fields})
    try:
        return COMMANDS[cfg.subcommand](cfg, out)
    except UsageError as exc:
        print(f"opan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as exc:
        print(f"opan: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OpanError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"opan: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # noqa: BLE001  the exit-code contract covers every failure
        print(f"opan: internal failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
