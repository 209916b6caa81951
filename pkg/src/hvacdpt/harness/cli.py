"""Command-line entry point.

Subcommands mirror the pipeline phases; each accepts ``--config <file>``
(JSON overriding the desk-scale defaults), ``--seed`` and ``--out``.
Exit codes: 0 success, 2 configuration error, 3 phase failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_run_config
from .pipeline import PHASES, PhaseError, run_pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHASE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvacdpt",
        description="Surrogate-building HVAC control pipeline: policy library, "
        "transformer pretraining, in-context deployment, and benchmarks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for phase in PHASES + ("pipeline",):
        p = sub.add_parser(
            phase,
            help=f"run the {phase} phase" if phase != "pipeline" else "run all phases in order",
        )
        p.add_argument("--config", default=None, help="JSON config overriding defaults")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
    )
    try:
        cfg = load_run_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out is not None:
            cfg["out_dir"] = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    phases = PHASES if args.command == "pipeline" else (args.command,)
    try:
        artifacts = run_pipeline(cfg, phases)
    except PhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHASE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for phase, path in artifacts.items():
        print(f"{phase}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
