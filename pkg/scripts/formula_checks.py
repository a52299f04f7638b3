"""Sampled statistics vs closed forms, plus the maximally-entangled PT-witness ratio table."""

import argparse

from womsim.ensembles import parse_seed
from womsim.experiments import formula_check_suite, mixed_detection_vs_purity
from womsim.witnesses import me_pt_witness_detection_limit, me_pt_witness_detection_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=parse_seed, default=1)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--purity-samples", type=int, default=200_000)
    args = ap.parse_args()

    lines = formula_check_suite(args.seed, args.samples)
    for ln in lines:
        print(ln.format())
    print(f"{sum(ln.passed for ln in lines)}/{len(lines)} lines within 3 sigma\n")

    limit = me_pt_witness_detection_limit()
    print(f"PT max-entangled witness ratio (limit {limit:.6f})")
    for d1 in (2, 3, 4, 5, 7, 10, 20, 50):
        r = me_pt_witness_detection_ratio(d1)
        print(f"  d1={d1:3d}  {r:.7f}  rel. to limit {r / limit - 1:+.2%}")

    rows, mono = mixed_detection_vs_purity(args.seed, args.purity_samples)
    print("\nBell-witness detection of entangled HS states by purity")
    for r in rows:
        frac = "   --" if r.fraction is None else f"{r.fraction:.4f}"
        print(f"  [{r.purity_lo:.2f}, {r.purity_hi:.2f})  n={r.entangled:7d}  {frac}")
    print(f"  nondecreasing in purity: {mono}")


if __name__ == "__main__":
    main()
