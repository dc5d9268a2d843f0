"""Command line entry point ``rbcom-sim``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .config import ConfigError, ExperimentConfig, Scenario, config_from_dict, load_config, parse_frequency
from .design import validate_design
from .scenarios import OutputExistsError, run_scenario

EXIT_CONFIG = 2
EXIT_OUTPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbcom-sim", description="Resonant beam link simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for scenario in Scenario:
        p = sub.add_parser(scenario.value)
        p.add_argument("--config", help="YAML experiment file (defaults used when omitted)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--force", action="store_true", help="write into a non-empty output directory")
        p.add_argument("--jobs", type=int, help="parallel workers for paired runs and sweep points")
    v = sub.add_parser("validate", help="check a carrier / LO / baseband / OBPF frequency plan")
    for name in ("fb", "fo", "bf", "fc"):
        v.add_argument(f"--{name}", required=True, type=parse_frequency)
    return parser


def _resolve(args) -> ExperimentConfig:
    overrides = {"scenario": args.command}
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = load_config(args.config, overrides) if args.config else config_from_dict(overrides)
    if args.jobs is not None:
        cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, jobs=args.jobs))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "validate":
        try:
            report = validate_design(args.fb, args.fo, args.bf, args.fc)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(report.to_dict(), indent=2))
        return 0 if report.passed else 1

    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_scenario(cfg, args.out, force=args.force)
    except OutputExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps({"status": result.status, "output_dir": str(result.output_dir),
                      "files": [p.name for p in result.files]}, indent=2))
    return result.status


if __name__ == "__main__":
    sys.exit(main())
