"""Mollification schedules for the indicator and the cone; writes CSV tables."""

import argparse
from pathlib import Path

from opan.report import write_csv
from opan.strict import strict_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/strict")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for case in ("indicator_1d", "cone_2d", "embedding_2d"):
        rep = strict_demo(case)
        write_csv(rep.rows, out / f"{case}.csv")
        print(case)
        for line in rep.verdict:
            print("  " + line)


if __name__ == "__main__":
    main()
