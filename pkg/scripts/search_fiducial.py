"""Search for Heisenberg-Weyl SIC fiducials in d = 2..6 and report overlap quality."""

import argparse
import time

from womsim.ensembles import RngStream, parse_seed
from womsim.measurements import FiducialSearchError, sic_fiducial_search, sic_potential_floor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=parse_seed, default=0xC0FFEE)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--restarts", type=int, default=200)
    args = ap.parse_args()
    for d in args.dims:
        t0 = time.perf_counter()
        try:
            fid = sic_fiducial_search(d, RngStream(args.seed, d), restarts=args.restarts)
        except FiducialSearchError as exc:
            print(f"d={d}: {exc}")
            continue
        extra = ""
        if d == 4:
            extra = f"  orbit concurrences in [{fid.orbit_concurrences().min():.12f}, {fid.orbit_concurrences().max():.12f}]"
        print(f"d={d}: overlap error {fid.overlap_error():.2e}, "
              f"potential excess {fid.frame_potential() - sic_potential_floor(d):.2e} "
              f"({time.perf_counter() - t0:.1f} s){extra}")


if __name__ == "__main__":
    main()
