"""Modulus-of-continuity stability and the Bitsadze boundary counterexample."""

import argparse
import json
from pathlib import Path

from opan import gallery
from opan.estimates import boundary_counterexample, modulus_suite
from opan.report import to_jsonable, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/estimates")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    op = gallery.get("dn_n2")
    fits = []
    for seeds in (range(0, 20), range(20, 40)):
        c_fit, curves = modulus_suite(op, seeds)
        fits.append(c_fit)
        rows = [{"seed": s, "radius": r, "lhs": a, "rhs": b} for s, c in zip(seeds, curves) for r, a, b in zip(c.radii, c.lhs, c.rhs)]
        write_csv(rows, out / f"modulus_seeds_{seeds.start}_{seeds.stop - 1}.csv")
    print(f"modulus: C_fit {fits[0]:.4f} vs {fits[1]:.4f} (relative gap {abs(fits[0] - fits[1]) / max(fits):.1%})")

    res = boundary_counterexample(gallery.get("bitsadze_n2"))
    rep = res.report
    print(f"boundary: slope {rep['slope']:.4f}, oracle {rep['oracle_slope']:.4f}, error {rep['slope_rel_error']:.1%}, bounded norms {rep['norms_bounded']}")
    (out / "boundary.json").write_text(json.dumps(to_jsonable(rep), sort_keys=True, indent=2))
    write_csv(
        [{"distance": d, "grid_sup": g, "oracle_sup": o} for d, g, o in zip(rep["distances"], rep["grid_sup"], rep["oracle_sup"])],
        out / "boundary_sup.csv",
    )


if __name__ == "__main__":
    main()
