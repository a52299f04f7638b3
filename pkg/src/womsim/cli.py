"""Command-line front end: ``womsim <group> <command> [flags]``.

Exit codes: 0 success, 1 verification or search failure, 2 usage error.
JSON output carries 17 significant digits, CSV output 9.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import RngStream, parse_seed
from .experiments import (
    ExperimentConfig,
    default_workers,
    detection_ratio_experiment,
    formula_check_suite,
)
from .linalg import eigvalsh, hs_inner
from .measurements import (
    DEFAULT_SEARCH_SEED,
    UNIFORM_CONCURRENCE_D4,
    FiducialSearchError,
    default_sic_pom,
    default_sic_wom,
    is_ic,
    load_fiducial,
    save_fiducial,
    sic_fiducial_search,
    sic_pom_from_fiducial,
    sic_potential_floor,
    wom_from_rank_one,
)
from .states import (
    StandardFormParams,
    negativity,
    wootters_concurrence,
)
from .tomography import dual_frame, linear_inversion_mse, mse_formula, reference_state, run_mse
from .witnesses import witness_state

DEFAULT_SEED = 0xC0FFEE
DEFAULT_SAMPLES = 1_000_000
DEFAULT_BINS = 20


class CliFailure(Exception):
    """Verification or search failure; maps to exit code 1."""


def _fmt_json(obj, indent: int = 2, level: int = 0) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return f"{x:.17g}" if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _fmt_json(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {_fmt_json(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt_json(v) for v in obj) + "]"
        items = [pad + _fmt_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become null."""
    return _fmt_json(obj)


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _at_least_two(text: str) -> int:
    value = _positive(text)
    if value < 2:
        raise argparse.ArgumentTypeError("at least 2 bins are required")
    return value


def _add_seed(p: argparse.ArgumentParser, default: int = DEFAULT_SEED) -> None:
    p.add_argument("--seed", type=_seed, default=default, help=f"master seed, decimal or 0x-hex (default {default:#x})")


# -- sic ---------------------------------------------------------------------


def cmd_sic_build(args) -> int:
    cached = args.d == 4 and not args.refresh
    if cached:
        fid = load_fiducial()
        source = "shipped cache"
    else:
        try:
            fid = sic_fiducial_search(args.d, RngStream(args.seed, 0), restarts=args.restarts)
        except FiducialSearchError as exc:
            raise CliFailure(f"{exc} (best frame-potential excess {exc.best_potential:.3g})") from None
        source = f"search (seed {args.seed:#x})"
    report = {
        "d": fid.d,
        "source": source,
        "overlap_error": fid.overlap_error(),
        "frame_potential": fid.frame_potential(),
        "frame_potential_floor": sic_potential_floor(fid.d),
    }
    ok = fid.overlap_error() <= 1e-8
    if fid.d == 4:
        conc = fid.orbit_concurrences()
        conc_err = float(np.abs(conc - UNIFORM_CONCURRENCE_D4).max())
        report["orbit_concurrences"] = conc
        report["concurrence_error"] = conc_err
        ok = ok and conc_err <= 1e-6
    report["amplitudes_re"] = fid.amplitudes.real
    report["amplitudes_im"] = fid.amplitudes.imag
    report["verified"] = ok
    if args.cache:
        save_fiducial(fid, args.cache)
        report["cache"] = str(args.cache)
    print(dumps(report))
    if not ok:
        raise CliFailure("fiducial failed verification")
    return 0


# -- wom ---------------------------------------------------------------------


def cmd_wom_build(args) -> int:
    if args.fiducial:
        wom = wom_from_rank_one(sic_pom_from_fiducial(load_fiducial(args.fiducial)))
    else:
        wom = default_sic_wom()
    outcomes = wom.outcomes
    d = wom.source.d
    gram = hs_inner(outcomes[:, None], outcomes[None, :]).real
    off = gram[~np.eye(len(gram), dtype=bool)]
    completeness = float(np.abs(outcomes.sum(axis=0) - np.eye(d)).max())
    spectra = eigvalsh(outcomes, check=False)
    report = {
        "outcomes": len(outcomes),
        "lambda_max": wom.lambda_max,
        "lambda_max_closed_form": 0.5 * (1 + math.sqrt(0.6)),
        "threshold_mu": wom.threshold,
        "normalization": wom.normalization,
        "completeness_error": completeness,
        "is_ic": is_ic(wom.as_pom()),
        "pairwise_inner_product": float(off.mean()),
        "pairwise_inner_product_spread": float(off.max() - off.min()),
        "outcome_spectra": spectra,
    }
    print(dumps(report))
    if completeness > 1e-8 or not report["is_ic"]:
        raise CliFailure("WOM failed structural verification")
    return 0


# -- detect ------------------------------------------------------------------


def cmd_detect_ratio(args) -> int:
    cfg = ExperimentConfig(
        seed=args.seed,
        samples=args.samples,
        bins=args.bins,
        state_class={"pure": "pure-haar", "mixed": "mixed-hs"}[args.states],
        detector={"pom": "sic-pom", "wom": "sic-wom"}[args.detector],
        workers=args.workers,
    )
    hist, summary = detection_ratio_experiment(cfg)
    full = summary.as_dict()
    if args.format == "json":
        text = dumps({"summary": full, "histogram": hist.rows()}) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        if args.out:
            Path(args.out).write_text(hist.to_csv())
            print(dumps(full))
        else:
            sys.stdout.write(hist.to_csv())
            print(dumps(full), file=sys.stderr)
    if summary.false_positives:
        raise CliFailure(f"{summary.false_positives} separable states were flagged")
    return 0


# -- tomo --------------------------------------------------------------------


def cmd_tomo_mse(args) -> int:
    pom = default_sic_pom() if args.pom == "sic" else default_sic_wom().as_pom()
    rho = reference_state(args.state, args.seed)
    purity = float(np.einsum("ij,ji->", rho, rho).real)
    lam = default_sic_wom().lambda_max
    formula = mse_formula(args.pom, pom.d, lam, purity, args.n)
    run = run_mse(pom, rho, args.n, args.trials, RngStream(args.seed, 0), args.pom, args.state, formula)
    record = run.as_record()
    record["exact_mse"] = linear_inversion_mse(pom, dual_frame(pom), rho, args.n)
    record["purity"] = purity
    record["z_score"] = run.z_score
    print(dumps(record))
    return 0


# -- check -------------------------------------------------------------------


def cmd_check_formulas(args) -> int:
    lines = formula_check_suite(args.seed, args.samples)
    if args.format == "json":
        print(dumps([ln.as_dict() for ln in lines]))
    else:
        for ln in lines:
            print(ln.format())
    failed = [ln.name for ln in lines if not ln.passed]
    if failed:
        raise CliFailure(f"{len(failed)} of {len(lines)} checks failed")
    return 0


# -- witness -----------------------------------------------------------------


def cmd_witness_info(args) -> int:
    alpha = args.alpha
    if not 0.0 < alpha <= math.pi / 4 + 1e-12:
        raise argparse.ArgumentTypeError(f"--alpha must lie in (0, pi/4], got {alpha}")
    params = StandardFormParams.from_alpha(alpha)
    p, q = params.p, params.q
    rho_w = witness_state(alpha)
    report = {
        "alpha": alpha,
        "concurrence_q": q,
        "p": p,
        "pure_witness_threshold": math.cos(alpha) ** 2,
        "pt_eigenvalues": [(1 + p) / 2, (1 - p) / 2, q / 2, -q / 2],
        "witness_state_threshold_mu": (1 + p) / (2 + 4 * p),
        "witness_state_concurrence": q / (1 + 2 * p),
        "witness_state_negativity": (1 - p) / (1 + 2 * p),
        "numeric_concurrence": wootters_concurrence(rho_w),
        "numeric_negativity": negativity(rho_w),
    }
    print(dumps(report))
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="womsim",
        description="Witness operator measurements: construction, detection Monte Carlo and tomography.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", metavar="GROUP", required=True)

    sic = groups.add_parser("sic", help="SIC fiducials").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = sic.add_parser("build", help="load or search for a SIC fiducial and verify it",
                       description="Load (d=4, shipped cache) or search for a Heisenberg-Weyl SIC fiducial and print a verification report.")
    p.add_argument("--d", type=int, default=4, choices=range(2, 7), metavar="D", help="Hilbert space dimension, 2..6 (default 4)")
    p.add_argument("--cache", type=Path, metavar="PATH", help="write the fiducial to PATH")
    p.add_argument("--refresh", action="store_true", help="search even when a shipped fiducial exists")
    _add_seed(p, DEFAULT_SEARCH_SEED)
    p.add_argument("--restarts", type=_positive, default=200, help="search restart budget (default 200)")
    p.set_defaults(func=cmd_sic_build)

    wom = groups.add_parser("wom", help="witness operator measurements").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = wom.add_parser("build", help="construct the SIC-WOM and print its structure",
                       description="Construct the WOM of the d=4 SIC-POM and print lambda_max, threshold, normalization and outcome spectra.")
    p.add_argument("--fiducial", type=Path, metavar="PATH", help="fiducial file (default: shipped cache)")
    p.set_defaults(func=cmd_wom_build)

    det = groups.add_parser("detect", help="detection Monte Carlo").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = det.add_parser("ratio", help="detection ratio histogram over concurrence",
                       description="Detection ratio of the SIC-POM or SIC-WOM against random two-qubit states, binned by concurrence.")
    p.add_argument("--states", choices=("pure", "mixed"), default="mixed", help="Haar pure or HS mixed states (default mixed)")
    p.add_argument("--detector", choices=("pom", "wom"), default="wom", help="SIC-POM or SIC-WOM witnesses (default wom)")
    _add_seed(p)
    p.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES, help=f"number of states (default {DEFAULT_SAMPLES})")
    p.add_argument("--bins", type=_at_least_two, default=DEFAULT_BINS, help=f"concurrence bins (default {DEFAULT_BINS})")
    p.add_argument("--workers", type=_positive, default=default_workers(), help="worker processes (default: CPU count)")
    p.add_argument("--out", type=Path, metavar="PATH", help="write the histogram to PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="histogram format (default csv)")
    p.set_defaults(func=cmd_detect_ratio)

    tomo = groups.add_parser("tomo", help="tomography Monte Carlo").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = tomo.add_parser("mse", help="linear-inversion mean square error",
                        description="Monte Carlo mean square error of linear-inversion tomography with the SIC-POM or SIC-WOM.")
    p.add_argument("--pom", choices=("sic", "wom"), default="sic", help="measurement (default sic)")
    p.add_argument("--state", choices=("mixed", "bell", "random"), default="mixed",
                   help="maximally mixed, Bell, or HS-random true state (default mixed)")
    p.add_argument("--n", type=_positive, default=100, metavar="N", help="copies per run (default 100)")
    p.add_argument("--trials", type=_positive, default=10_000, metavar="T", help="independent runs (default 10000)")
    _add_seed(p)
    p.set_defaults(func=cmd_tomo_mse)

    chk = groups.add_parser("check", help="statistical formula checks").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = chk.add_parser("formulas", help="compare sampled statistics with closed forms at 3 sigma",
                       description="Compare sampled statistics with their closed forms; exit 1 if any line misses by more than 3 standard errors.")
    _add_seed(p)
    p.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES, help=f"samples per line (default {DEFAULT_SAMPLES})")
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format (default text)")
    p.set_defaults(func=cmd_check_formulas)

    wit = groups.add_parser("witness", help="two-qubit witness data").add_subparsers(dest="command", metavar="COMMAND", required=True)
    p = wit.add_parser("info", help="thresholds, concurrence and negativity for a standard-form angle",
                       description="Thresholds, concurrence and negativity of the pure witness and witness state at angle alpha.")
    p.add_argument("--alpha", type=float, required=True, metavar="A", help="standard-form angle in (0, pi/4]")
    p.set_defaults(func=cmd_witness_info)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"womsim: error: {exc}", file=sys.stderr)
        return 2
    except CliFailure as exc:
        print(f"womsim: failure: {exc}", file=sys.stderr)
        return 1


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
