"""Command line front end.

One subcommand so far::

    stormcover run --config scenario.txt --out results/ \
        [--models B,A,P1..U2] [--threads N] [--fov-deg 45]

The config file is the flat ``key = value`` format read by
harness.parse_config; --models and --fov-deg override it.  The run
writes rewards.csv, pct_increase.csv, outperform.csv, summary.csv plus
plans/, schedules/ and tracks/ under --out, and prints the summary table
to stdout.  Exit status 0 on success, 1 with a diagnostic on stderr for
configuration or I/O problems, 2 for bad command lines (argparse).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormcover",
        description="Compare observation concepts against moving-target tracks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a track corpus and write comparison reports")
    run.add_argument("--config", required=True, metavar="FILE", help="scenario config file")
    run.add_argument("--out", required=True, metavar="DIR", help="output directory")
    run.add_argument(
        "--models",
        metavar="LIST",
        help="comma list of concepts; `..` spans the canonical order (default: config)",
    )
    run.add_argument(
        "--threads", type=int, default=1, metavar="N", help="worker processes (default 1)"
    )
    run.add_argument(
        "--fov-deg",
        type=float,
        default=None,
        dest="fov_deg",
        metavar="DEG",
        help="override the sensor cone half-angle",
    )
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        if args.threads < 1:
            raise ValueError("--threads must be at least 1")
        config, tracks = harness.load_config(args.config)
        if args.models:
            config = replace(config, models=harness.parse_models(args.models))
        if args.fov_deg is not None:
            config = replace(config, fov_half_angle=math.radians(args.fov_deg))
        report, results = harness.run_corpus(tracks, config, threads=args.threads)
        harness.write_outputs(
            args.out,
            tracks,
            results,
            report,
            satellite_names=[sc.name for sc in config.satellites],
        )
    except (ValueError, OSError) as exc:
        print(f"stormcover: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(harness.emit_report(report, "text-table").decode())
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    raise AssertionError("unreachable: argparse requires a known subcommand")


if __name__ == "__main__":
    sys.exit(main())
