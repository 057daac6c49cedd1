"""Command-line front end: ``bfree <subcommand> [options]``.

Exit status: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import scenarios
from .errors import InputError
from .runner import SUBCOMMANDS, run_subcommand
from .verification import acceptance_suite

LEVELS = {"quiet": logging.WARNING, "normal": logging.INFO, "debug": logging.DEBUG}
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bfree", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS + ("scenarios",))
    p.add_argument("--scenario", help=f"one of: {', '.join(scenarios.SCENARIOS)}")
    p.add_argument("--config", help="INI or JSON configuration file")
    p.add_argument("--out", help="output root (default: out)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--family", help="B-set, e.g. scaled-primes:2+explicit:9")
    p.add_argument("-K", type=int, dest="K")
    p.add_argument("-L", type=int, dest="L")
    p.add_argument("--log", choices=tuple(LEVELS), default="normal")
    p.add_argument("--acceptance", default=None, metavar="LIST",
                   help="with verify: run acceptance criteria (all, or e.g. 1,3,5)")
    return p


def _acceptance(select: str) -> int:
    chosen = None if select == "all" else [int(v) for v in select.split(",")]
    checks = acceptance_suite(chosen)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=LEVELS[args.log], format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.subcommand == "scenarios":
        for name, vals in scenarios.SCENARIOS.items():
            print(f"{name}: {vals['family']}")
        return EXIT_OK
    try:
        if args.acceptance is not None:
            if args.subcommand != "verify":
                raise InputError("--acceptance only applies to verify")
            return _acceptance(args.acceptance)
        flags = {"seed": args.seed, "out": args.out, "family": args.family,
                 "K": args.K, "L": args.L}
        cfg = scenarios.load(args.scenario, args.config, flags)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_subcommand(args.subcommand, cfg, threads=args.threads)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as an internal failure
        logging.getLogger("bfree").debug("%s", traceback.format_exc())
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
