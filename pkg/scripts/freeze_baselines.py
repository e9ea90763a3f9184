"""Regenerate the frozen ratio tables in tests/data for D^2 on R^2.

Run only when a deliberate numerical change is made; the regression test
compares fresh runs against these files within 1%.
"""

import argparse
import json
from pathlib import Path

from opan import __version__, gallery
from opan.estimates import VerifyConfig, verify_inequalities
from opan.report import to_jsonable

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fields", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    op = gallery.get("dn_n2")
    DATA.mkdir(parents=True, exist_ok=True)
    for which in ("linfty", "vs_j"):
        rep = verify_inequalities(op, which, VerifyConfig(num_fields=args.fields, seed=args.seed))
        out = DATA / f"baseline_dn_n2_{which}.json"
        payload = {"artifact_version": __version__, "operator": "dn_n2", "report": to_jsonable(rep)}
        out.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        print(f"{which}: max ratio {rep.max_ratio:.6g} -> {out}")


if __name__ == "__main__":
    main()
