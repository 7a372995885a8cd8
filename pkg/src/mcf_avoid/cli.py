"""Command line entry point: ``mcf-avoid run|suite|oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources

import numpy as np

from .errors import McfAvoidError
from .oracles import KINDS, oracle
from .runner import fmt, run_file, run_suite


def bundled_scenarios():
    return resources.files("mcf_avoid") / "scenarios"


def _add_overrides(p):
    p.add_argument("--grid-n", type=int, help="override grid.n")
    p.add_argument("--t-end", type=float, help="override flow.t_end")
    p.add_argument("--tolerance", type=float, help="override report.tolerance")
    p.add_argument("--out", default="out", help="output root (one sub-directory per scenario)")
    p.add_argument("--quiet", action="store_true", help="only set the exit status")


def _overrides(args):
    return dict(grid_n=args.grid_n, t_end=args.t_end, tolerance=args.tolerance)


def _parse_params(items):
    params = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise SystemExit(f"oracle parameters take the form key=value, got {item!r}")
        params[key] = float(val)
    return params


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mcf-avoid", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("config")
    _add_overrides(p_run)

    p_suite = sub.add_parser("suite", help="run every scenario in a directory")
    p_suite.add_argument("directory", nargs="?", help="defaults to the bundled scenarios")
    _add_overrides(p_suite)

    p_or = sub.add_parser("oracle", help="evaluate a reference solution")
    p_or.add_argument("kind", choices=KINDS)
    p_or.add_argument("params", nargs="*", help="key=value, e.g. r0=0.5")
    p_or.add_argument("--at", type=float, nargs="+", required=True,
                      help="times (radii for annulus_harmonic)")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.cmd == "oracle":
        res = oracle(args.kind, _parse_params(args.params), args.at)
        for a, v in zip(res.at, res.values):
            print(f"{fmt(a)},{'nan' if np.isnan(v) else fmt(v)}")
        return 0

    if args.cmd == "run":
        try:
            res = run_file(args.config, args.out, **_overrides(args))
        except McfAvoidError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
        if not args.quiet:
            print(res.summary())
            if res.outdir is not None:
                print(f"wrote {res.outdir}")
        return res.exit_code

    directory = args.directory or bundled_scenarios()
    results = run_suite(directory, args.out, **_overrides(args))
    if not args.quiet:
        for _, _, line in results:
            print(line)
    return max((code for _, code, _ in results), default=0)


if __name__ == "__main__":
    sys.exit(main())
