"""Linear-inversion MSE of the SIC-POM vs the SIC-WOM for several true states and copy numbers."""

import argparse

from womsim.ensembles import RngStream, parse_seed
from womsim.measurements import default_sic_pom, default_sic_wom
from womsim.tomography import mse_formula, reference_state, required_copies_estimate, run_mse


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=parse_seed, default=0xC0FFEE)
    ap.add_argument("--trials", type=int, default=10_000)
    args = ap.parse_args()

    wom = default_sic_wom()
    poms = {"sic": default_sic_pom(), "wom": wom.as_pom()}
    print(f"{'state':7s} {'N':>6s} {'sic':>10s} {'wom':>10s} {'ratio':>7s}")
    for k, state in enumerate(("mixed", "bell", "random")):
        rho = reference_state(state, args.seed)
        purity = float((rho @ rho).trace().real)
        for j, n in enumerate((100, 1000)):
            mse = {}
            for kind, pom in poms.items():
                f = mse_formula(kind, 4, wom.lambda_max, purity, n)
                rng = RngStream(args.seed, 100 * k + 10 * j + (kind == "wom"))
                run = run_mse(pom, rho, n, args.trials, rng, kind, state, f)
                mse[kind] = run.empirical_mse
                assert abs(run.z_score) < 4, run
            print(f"{state:7s} {n:6d} {mse['sic']:10.5f} {mse['wom']:10.5f} {mse['sic'] / mse['wom']:7.4f}")
    print(f"\ncopies to resolve the separable ball in 2x2 (order of magnitude): {required_copies_estimate(4):.3g}")


if __name__ == "__main__":
    main()
