"""Command-line entry point: ``periodic-gp run [MODE] --config PATH ...``."""
from __future__ import annotations

import argparse
import sys

from ._validation import NumericalDegeneracyError, ScheduleDomainError
from .config import MODES, ConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

FULL_SCALE_REPLICATIONS = 100


def build_parser():
    parser = argparse.ArgumentParser(
        prog="periodic-gp",
        description="Periodic GP-UCB bandit experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("mode", nargs="?", choices=MODES,
                     help="overrides the config's 'mode' key")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--seed", type=int, help="master seed (overrides 'seed')")
    run.add_argument("--reps", type=int, help="replications (overrides 'reps')")
    run.add_argument("--out", help="output directory (overrides 'out')")
    run.add_argument("--jobs", type=int, help="worker processes (overrides 'jobs')")
    run.add_argument("--full-scale", action="store_true",
                     help=f"use {FULL_SCALE_REPLICATIONS} replications")
    run.add_argument("--validate", action="store_true",
                     help="parse and check the config, then exit")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    reps = FULL_SCALE_REPLICATIONS if args.full_scale else args.reps
    overrides = {
        "mode": args.mode,
        "seed": args.seed,
        "reps": reps,
        "out": args.out,
        "jobs": args.jobs,
    }
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.validate:
        print(f"config ok: mode={cfg.mode}")
        return EXIT_OK

    from .experiments import run

    try:
        files = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if isinstance(exc, ScheduleDomainError):
            print(f"numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDegeneracyError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for name, path in files.items():
        print(f"{name}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
