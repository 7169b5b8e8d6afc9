"""Command-line experiment runner.

Subcommands mirror the experiment kinds: convergence, efficiency,
energy-drift, simulate. Exit codes: 0 success, 2 blow-up, 3 config error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    RUNNERS,
    ConfigError,
    ReferenceCertificationError,
    load_config,
)
from .integrators import BlowUpError

EXIT_OK = 0
EXIT_BLOWUP = 2
EXIT_CONFIG = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symkg",
        description="Run spectral Klein-Gordon time-integration experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ("convergence", "efficiency", "energy-drift", "simulate"):
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", required=True, help="output directory for CSV/JSON")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument(
            "--seed-override",
            type=int,
            default=None,
            help="replace the datum seed from the config",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if config.kind != args.command:
            raise ConfigError(
                f"config kind {config.kind!r} does not match subcommand {args.command!r}"
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    runner = RUNNERS[args.command]
    try:
        report = runner(
            config,
            threads=args.threads,
            out_dir=args.out,
            seed_override=args.seed_override,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ReferenceCertificationError as exc:
        print(f"reference certification failed: {exc}", file=sys.stderr)
        return 1

    if report.blew_up:
        print("experiment finished with blow-up rows; see the report", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
