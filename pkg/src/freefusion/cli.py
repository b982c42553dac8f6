"""Command-line interface.

Exit codes: 0 on success, 1 when a numerical routine fails, 2 for usage or
input validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import datagen
from .detection import DEFAULT_MARGIN_FRAC, DEFAULT_MIN_FRACTION, detect
from .empirical import DEFAULT_BINS, DEFAULT_ETA, DEFAULT_TRIALS, Histogram, PolyId, empirical_spectrum
from .errors import FreeFusionError, NumericError
from .free_operator import DEFAULT_TOL as P2_TOL
from .free_operator import LAMBDA_EPS, asd_p2
from .free_scalar import DEFAULT_TOL as P1_TOL
from .free_scalar import asd_p1
from .numerics import RngStream
from .pipeline import ratio, run_battery, theoretical_bound, write_battery
from .spectra import DEFAULT_EPS, DEFAULT_GRID_POINTS, MpParams, SpectralDensity, mp_density
from .svgplot import render_overlay

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _poly(value: str) -> PolyId:
    try:
        return PolyId(value.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown polynomial {value!r} (choose p0, p1, p2)") from None


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def cmd_mp(args) -> None:
    mp_density(MpParams(args.sigma2, args.c), grid_points=args.points).to_csv(args.out)


def cmd_asd(args) -> None:
    p0, p1 = MpParams(args.sigma2, args.c0), MpParams(args.sigma2, args.c1)
    if args.poly is PolyId.P1:
        d = asd_p1(p0, p1, eps=args.eps, tol=args.tol if args.tol is not None else P1_TOL)
    elif args.poly is PolyId.P2:
        d = asd_p2(p0, p1, delta=args.eps, eps=args.lambda_eps,
                   tol=args.tol if args.tol is not None else P2_TOL)
    else:
        raise UsageError("asd needs --poly p1 or p2 (use 'mp' for p0)")
    d.to_csv(args.out)


def _load_windows(args):
    if args.v0 is None:
        raise UsageError("--v0 is required")
    v0 = datagen.load_csv(args.v0)
    v1 = datagen.load_csv(args.v1) if args.v1 else None
    if args.poly is not PolyId.P0 and v1 is None:
        raise UsageError(f"{args.poly.value} needs --v1")
    return v0, v1


def _esd(args, v0, v1) -> Histogram:
    return empirical_spectrum(
        v0, v1, args.poly, trials=args.trials, eta=args.eta, bins=args.bins,
        rng=RngStream(args.seed),
    )


def cmd_esd(args) -> None:
    v0, v1 = _load_windows(args)
    _esd(args, v0, v1).to_csv(args.out)


def cmd_detect(args) -> None:
    if (args.hist is None) == (args.v0 is None):
        raise UsageError("give exactly one of --hist or --v0")
    if (args.bound is None) == (not args.auto):
        raise UsageError("give exactly one of --bound or --auto")
    if args.hist is not None:
        eigs = Histogram.from_csv(args.hist).eigenvalues()
        c0, c1 = args.c0, args.c1
    else:
        v0, v1 = _load_windows(args)
        eigs = _esd(args, v0, v1).eigenvalues()
        c0 = ratio(v0)
        c1 = ratio(v1) if v1 is not None else c0
    if args.auto:
        bound = theoretical_bound(args.poly, c0, c1)
    else:
        bound = SpectralDensity.from_csv(args.bound)
    rep = detect(eigs, bound, args.margin, args.min_fraction)
    _write_json(rep.to_dict(), args.out)


def cmd_simulate(args) -> None:
    try:
        doc = json.loads(Path(args.scenario).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.scenario}: invalid JSON ({exc})") from None
    spec = datagen.spec_from_dict(doc)
    ts = datagen.generate_scenario(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    datagen.save_csv(ts, out / "timeseries.csv")
    for name, start in datagen.WINDOW_STARTS.items():
        if start + datagen.WINDOW_LENGTH > ts.total_samples:
            print(f"skipping window {name}: series has only {ts.total_samples} samples",
                  file=sys.stderr)
            continue
        datagen.save_csv(datagen.sample_window(ts, start), out / f"{name}.csv")


def cmd_plot(args) -> None:
    if not args.density and not args.hist:
        raise UsageError("nothing to plot: give --density and/or --hist")
    densities = [(Path(p).stem, SpectralDensity.from_csv(p)) for p in args.density]
    hists = [(Path(p).stem, Histogram.from_csv(p)) for p in args.hist]
    Path(args.out).write_text(render_overlay(densities, hists, title=args.title))


def cmd_report(args) -> None:
    scenarios = datagen.load_battery(args.scenarios) if args.scenarios else None
    result = run_battery(
        scenarios, args.poly, seed=args.seed, trials=args.trials, eta=args.eta,
        bins=args.bins, margin_frac=args.margin, min_fraction=args.min_fraction,
    )
    write_battery(result, args.out)


def _esd_flags(p):
    p.add_argument("--v0", help="CSV window (rows = nodes, columns = samples)")
    p.add_argument("--v1", help="second CSV window (needed for p1, p2)")
    p.add_argument("--poly", type=_poly, default=PolyId.P0, help="p0 (default), p1 or p2")
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)


def _detect_flags(p):
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN_FRAC,
                   help="tolerance band as a fraction of the support width")
    p.add_argument("--min-fraction", type=float, default=DEFAULT_MIN_FRACTION,
                   help="outlier fraction above which H0 is rejected")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freefusion",
        description="Spectra of fused Wishart matrices and outlier-based anomaly detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mp", help="tabulate a Marchenko-Pastur density")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("asd", help="limiting density of S0 + S1 (p1) or S0 S1 + S1 S0 (p2)")
    p.add_argument("--poly", type=_poly, required=True)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS,
                   help="height above the real axis for Stieltjes inversion")
    p.add_argument("--lambda-eps", type=float, default=LAMBDA_EPS,
                   help="regularization of the corner embedding (p2 only)")
    p.add_argument("--tol", type=float, default=None, help="fixed-point tolerance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_asd)

    p = sub.add_parser("esd", help="Monte Carlo eigenvalue histogram")
    _esd_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_esd)

    p = sub.add_parser("detect", help="outlier test against a theoretical bound")
    p.add_argument("--hist", help="histogram CSV (alternative to --v0/--v1)")
    _esd_flags(p)
    p.add_argument("--bound", help="density CSV used as the bound")
    p.add_argument("--auto", action="store_true", help="compute the bound for --poly")
    p.add_argument("--c0", type=float, default=1.0, help="ratio for --auto with --hist")
    p.add_argument("--c1", type=float, default=1.0, help="ratio for --auto with --hist")
    _detect_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="generate a scenario and its measurement windows")
    p.add_argument("--scenario", required=True, help="JSON scenario spec")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="SVG overlay of densities and histograms")
    p.add_argument("--density", action="append", default=[])
    p.add_argument("--hist", action="append", default=[])
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("report", help="run the scenario battery")
    p.add_argument("--scenarios", help="JSON list of scenarios (default: built-in battery)")
    p.add_argument("--poly", type=_poly, default=PolyId.P1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    _detect_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericError as exc:
        print(f"freefusion: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"freefusion {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FreeFusionError, OSError) as exc:
        print(f"freefusion {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
