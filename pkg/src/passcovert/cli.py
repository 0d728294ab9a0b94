"""Command-line entry point: ``passcovert <command> --config FILE --out DIR``.

Exit codes: 0 success, 2 config error, 3 infeasible scenario, 4 numerical failure
(including a failed Monte Carlo check under ``validate``).
"""
from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .errors import (ConfigError, InfeasibleGeometry, NoFeasibleGridPoint, NoFeasiblePower, PassCovertError)

COMMANDS = {
    "dep-curve": harness.run_dep_vs_tau,
    "dep-vs-jamming": harness.run_dep_vs_jamming,
    "acr-curve": harness.run_acr_vs_pc,
    "optimize": harness.run_optimizer_study,
    "validate": harness.run_validation,
}

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


def build_parser():
    parser = argparse.ArgumentParser(prog="passcovert", description="Covert pinching-antenna downlink toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario YAML file (omit for the built-in defaults)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="overrides the scenario seed")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return parser


def write_streams(streams, out_dir, fmt):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, records in streams.items():
        path = os.path.join(out_dir, f"{name}.{fmt}")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(harness.dumps_records(records, fmt))
        paths.append(path)
    return paths


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = harness.load_scenario(args.config) if args.config else harness.parse_config_text("")
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise harness.ValidationError("--seed", "must be an unsigned 64-bit integer")
            cfg = cfg.with_seed(args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleGeometry as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PassCovertError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        streams = COMMANDS[args.command](cfg)
    except (InfeasibleGeometry, NoFeasiblePower, NoFeasibleGridPoint) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PassCovertError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in write_streams(streams, args.out, args.format):
        print(path)
    if args.command == "validate":
        failed = [r for r in streams["validation"] if r["pass"] is False]
        if failed:
            print(f"{len(failed)} Monte Carlo checks outside 4 standard errors", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
