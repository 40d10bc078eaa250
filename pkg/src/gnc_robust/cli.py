"""Command line entry point: ``bench``, ``solve`` and ``summary``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench
from .errors import GncError, ParseError
from .correspondences import load_registration, load_registration_from_ply, load_shape
from .shape_alignment import quat_from_rotation

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_PARSE_ERROR = 2


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _methods(text):
    try:
        return tuple(bench.Method(m.strip()) for m in text.split(",") if m.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gnc-bench", description="Robust pose estimation benchmarks and one-shot solves.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    apps = [a.value for a in bench.Application]
    methods = ",".join(m.value for m in bench.Method)

    p = sub.add_parser("bench", help="Monte Carlo sweep over outlier rates, written as CSV")
    p.add_argument("--app", choices=apps, default="registration")
    p.add_argument("--methods", type=_methods, default=tuple(bench.Method),
                   help=f"comma-separated subset of {methods}")
    p.add_argument("--rates", type=_floats, default=bench.DEFAULT_RATES,
                   help="comma-separated outlier rates, strictly increasing in [0, 1)")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--n", type=int, default=None, help="correspondences (default 100 / 50)")
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--cbar", type=float, default=None, help="noise bound (default 6 sigma)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ply", default=None, help="source cloud for registration instead of random points")
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("solve", help="estimate a pose from a correspondence file")
    p.add_argument("--app", choices=apps, default="registration")
    p.add_argument("--method", type=bench.Method, default=bench.Method.GNC_TLS,
                   help=f"one of {methods}")
    p.add_argument("--input", required=True,
                   help="correspondence file, or an index file when --source/--target are given")
    p.add_argument("--source", default=None, help="source PLY (registration)")
    p.add_argument("--target", default=None, help="target PLY (registration)")
    p.add_argument("--cbar", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("summary", help="median/max errors per method and rate from a bench CSV")
    p.add_argument("--in", dest="infile", required=True)
    return parser


def cmd_bench(args):
    spec = bench.BenchSpec(
        application=args.app,
        methods=args.methods,
        outlier_rates=args.rates,
        runs_per_rate=args.runs,
        n=args.n,
        sigma=args.sigma,
        c_bar=args.cbar,
        seed=args.seed,
        ply_path=args.ply,
    )
    records = bench.run_benchmark(spec, jobs=args.jobs)
    if args.out == "-":
        bench.write_csv(records, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.write_csv(records, fh)
        print(bench.format_summary(bench.summarize(records)), file=sys.stderr)
    return EXIT_OK


def _vec(values):
    return " ".join(f"{float(x):.12g}" for x in values)


def cmd_solve(args):
    try:
        if args.app == "registration":
            if (args.source is None) != (args.target is None):
                print("error: --source and --target go together", file=sys.stderr)
                return EXIT_PARSE_ERROR
            if args.source is not None:
                data = load_registration_from_ply(args.source, args.target, args.input)
            else:
                data = load_registration(args.input)
        else:
            data = load_shape(args.input)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    try:
        out = bench.run_method(args.method, args.app, data, args.cbar, seed=args.seed)
    except GncError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    est = out.estimate
    print(f"application: {args.app}")
    print(f"method: {bench.Method(args.method).value}")
    print(f"rotation_colmajor: {_vec(est.R.ravel(order='F'))}")
    print(f"quaternion_xyzw: {_vec(quat_from_rotation(est.R))}")
    print(f"translation: {_vec(est.t)}")
    if hasattr(est, "s"):
        print(f"scale: {est.s:.12g}")
    print(f"inliers: {int(np.sum(out.inlier_mask))}")
    print(f"measurements: {len(out.inlier_mask)}")
    print(f"iterations: {out.iterations}")
    print(f"converged: {'true' if out.converged else 'false'}")
    return EXIT_OK if out.converged else EXIT_NOT_CONVERGED


def cmd_summary(args):
    try:
        with open(args.infile, newline="") as fh:
            records = bench.read_csv(fh)
    except (OSError, ValueError) as exc:
        print(f"error: {args.infile}: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    print(bench.format_summary(bench.summarize(records)))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    handler = {"bench": cmd_bench, "solve": cmd_solve, "summary": cmd_summary}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
