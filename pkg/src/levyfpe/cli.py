"""Command-line runner: ``levyfpe <experiment> --config FILE [options]``.

Exit status is 0 on success, 1 when the experiment fails or raises, and 2 for
usage or configuration errors.
"""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import run
from .reports import emit

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _u64(v):
    x = int(v)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return x


def _threads(v):
    x = int(v)
    if x < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return x


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="levyfpe",
        description="Generator, adjoint and forward-equation experiments for "
                    "Levy-driven SDEs.",
    )
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="key = value file with [section] headers")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--seed", type=_u64, help="overrides [sim] seed")
    ap.add_argument("--threads", type=_threads, default=1,
                    help="worker threads for simulation; does not change results")
    ap.add_argument("--timing", action="store_true",
                    help="include wall-clock seconds in JSON output")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"levyfpe: cannot read config: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(args.experiment, text)
    except ConfigError as e:
        print(f"levyfpe: {args.config}: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(cfg, seed=args.seed, threads=args.threads)
    except ConfigError as e:
        print(f"levyfpe: {args.config}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as e:
        print(f"levyfpe: {args.experiment} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    data = emit(report, args.format, timing=args.timing)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    for msg in report.failures:
        print(f"levyfpe: {args.experiment}: {msg}", file=sys.stderr)
    return EXIT_FAILURE if report.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
