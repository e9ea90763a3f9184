"""Classify every gallery operator and write one JSON report per entry."""

import argparse
import time
from pathlib import Path

from opan import gallery
from opan.classify import ClassifyConfig, classify
from opan.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/gallery")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    for entry in gallery.gallery():
        rep = classify(entry.operator, ClassifyConfig(seed=args.seed))
        (out / f"{entry.id}.json").write_bytes(emit_report(rep))
        checks = gallery.check_entry(entry, rep)
        bad = [k for k, (_, _, ok) in checks.items() if not ok]
        print(f"{entry.id:18s} {'ok' if not bad else 'MISMATCH ' + ','.join(bad)}")
    print(f"total {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
