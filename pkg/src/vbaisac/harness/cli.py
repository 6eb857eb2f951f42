"""Command-line entry point: ``vbaisac <command> [--config F] [--out DIR]``.

Exit codes are 0 on success, 2 for configuration errors and 3 when a solver
or model routine fails.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from ..errors import VbaIsacError
from .config import DEFAULTS, ConfigError, load_config
from .experiments import EXPERIMENTS

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbaisac", description="Vehicular ISAC beamforming experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("print-defaults", help="print the embedded default configuration")
    for name, fn in EXPERIMENTS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0])
        p.add_argument("--config", help="scenario file layered over the defaults")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "print-defaults":
        sys.stdout.write(DEFAULTS)
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("config-parse-error: --seed must be non-negative")
            cfg = cfg.with_seed(args.seed)
        if args.threads < 1:
            raise ConfigError("config-parse-error: --threads must be at least 1")
    except ConfigError as exc:
        print(f"vbaisac: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        header, rows = EXPERIMENTS[args.command](cfg, threads=args.threads)
    except (VbaIsacError, ArithmeticError, ValueError) as exc:
        print(f"vbaisac: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.command}.csv")
    write_csv(path, header, rows)
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
