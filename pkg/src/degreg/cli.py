"""Command-line entry point.

Subcommands: rate, risk, concentration, lowerbound.  Each reads a JSON
experiment config, writes delimited output (CSV by default, JSON on
request), and optionally renders diagnostic figures next to the output
file.  Exit codes: 0 success, 1 configuration error, 2 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .harness import (CONCENTRATION_COLUMNS, LOWER_BOUND_COLUMNS,
                      RATE_COLUMNS, RISK_COLUMNS, ConfigError,
                      DegenerateInputError, ExperimentConfig,
                      NumericalFailure, rate_rows, render_rows, risk_rows,
                      run_concentration, run_lower_bound, run_risk)
from .rates import NoSolutionError
from .rv_math import DomainError, NonIntegrableError, QuadratureError

_CONFIG_ERRORS = (ConfigError, NonIntegrableError, DomainError, ValueError)
_NUMERICAL_ERRORS = (NumericalFailure, NoSolutionError, QuadratureError,
                     DegenerateInputError, FloatingPointError,
                     ZeroDivisionError, OverflowError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degreg",
        description="Pointwise regression experiments under degenerate "
                    "designs: exact rates, Monte Carlo risk, concentration "
                    "diagnostics, and lower-bound certificates.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("rate", "exact and asymptotic rates over the configured n grid"),
        ("risk", "Monte Carlo risk of the configured estimator"),
        ("concentration", "empirical exceedance vs exponential bounds"),
        ("lowerbound", "two-point certificates vs adaptive-estimator risk"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH",
                       help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="override the config's master_seed")
        p.add_argument("--out", required=True, metavar="PATH",
                       help="output file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=1, metavar="K",
                       help="worker threads (output is identical for any "
                            "value)")
        p.add_argument("--figures", action="store_true",
                       help="render PNG figures alongside the output")
        if name == "concentration":
            p.add_argument("--which", required=True,
                           choices=("counting", "kernel_moment",
                                    "eigenvalue", "bandwidth_ratio"))
    return parser


def _load_config(path: str, seed: Optional[int]) -> ExperimentConfig:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: "
                              f"{exc}") from exc
    if seed is not None:
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        raw["master_seed"] = seed
    return ExperimentConfig.from_dict(raw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        config = _load_config(args.config, args.seed)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "rate":
            columns, rows = RATE_COLUMNS, rate_rows(config)
        elif args.command == "risk":
            columns = RISK_COLUMNS
            rows = risk_rows(run_risk(config, threads=args.threads))
        elif args.command == "concentration":
            columns = CONCENTRATION_COLUMNS
            rows = run_concentration(config, args.which,
                                     threads=args.threads)
        else:
            columns = LOWER_BOUND_COLUMNS
            rows = run_lower_bound(config, threads=args.threads)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    text = render_rows(columns, rows, args.format)
    with open(args.out, "w", newline="\n") as fh:
        fh.write(text)

    if args.figures:
        from . import figures
        made = figures.render(args.command, rows, args.out)
        for path in made:
            print(f"wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
