"""Command line entry point.

Subcommands select the experiment; all mathematical inputs live in the config
file.  Exit codes: 0 success, 1 mathematical failure (a condition failed or no
solution was found), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments import COMMANDS, RunConfig, execute


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kirchfem",
        description=(
            "Finite element experiments for two-parameter Kirchhoff-type "
            "Dirichlet problems: hypothesis audits, threshold estimation, "
            "multi-solution solves and (lambda, mu) sweeps."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_lines = {
        "check": "audit the structural hypotheses of the configured problem",
        "theta-star": "estimate the coupling threshold by ratio minimization",
        "solve": "find distinct weak solutions at one (lambda, mu)",
        "sweep": "map solution counts over a (lambda, mu) grid with budgets",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=help_lines[name])
        p.add_argument("--config", required=True, help="path to the YAML run config")
        p.add_argument("--out", default=None, help="output directory (default: from config or ./out)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        verbosity = p.add_mutually_exclusive_group()
        verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")
        verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    level = logging.INFO
    if args.quiet:
        level = logging.WARNING
    elif args.verbose:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", force=True)

    try:
        cfg = RunConfig.from_file(args.config, seed_override=args.seed, out_override=args.out)
        if args.command == "solve" and cfg.solve_lam is None:
            raise ConfigError("the solve command needs a 'solve' section in the config")
        if args.command == "sweep" and cfg.sweep_lambdas is None:
            raise ConfigError("the sweep command needs a 'sweep' section in the config")
    except ConfigError as exc:
        logging.getLogger("kirchfem").error("%s", exc)
        return 2
    out_dir = Path(args.out) if args.out else None
    return execute(cfg, args.command, out_dir)


if __name__ == "__main__":
    sys.exit(main())
