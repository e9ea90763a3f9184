"""Planar Laplacian log coefficient and the Bitsadze discontinuity witness."""

import argparse
import math
import time
from pathlib import Path

from opan import gallery
from opan.classify import compute_L
from opan.kernel import KernelConfig, decompose_kernel, discontinuity_witness, solve_dirac, write_oscillation_csv, write_profile_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--out", default="results/kernel")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = KernelConfig(grid=args.grid)

    t0 = time.perf_counter()
    lap = gallery.get("laplace_n2")
    model = decompose_kernel(solve_dirac(lap, (1,), cfg), lap, (1,))
    b = model.log_vector[0]
    via_L = compute_L(lap).matrix[0, 0] / (2 * math.pi) ** 2
    print(f"laplace: fitted log coefficient {b:.6f}, 1/(2 pi) = {1 / (2 * math.pi):.6f}, L/(2 pi)^2 = {via_L:.6f}")
    print(f"         relative errors {abs(b * 2 * math.pi - 1):.2e} and {abs(b / via_L - 1):.2e}; {time.perf_counter() - t0:.1f} s")

    bit = gallery.get("bitsadze_n2")
    model = decompose_kernel(solve_dirac(bit, (1, 0), cfg), bit, (1, 0))
    wit = discontinuity_witness(model)
    osc = [o for _, o in wit.oscillation_by_radius]
    print(f"bitsadze: kind {wit.kind}, log/profile {wit.log_norm / wit.profile_norm:.2e}, spread {max(osc) / min(osc) - 1:.2%}")
    write_oscillation_csv(wit, out / "bitsadze_oscillation.csv")
    write_profile_csv(model, out / "bitsadze_profile.csv")


if __name__ == "__main__":
    main()
