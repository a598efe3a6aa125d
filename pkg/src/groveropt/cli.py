"""Command line interface.

Subcommands:

* ``run``   -- one experiment config; emits a single summary row.
* ``curve`` -- first-passage performance curve for one config.
* ``table`` -- sweep every registry function at one arity; one row each.

Set ``GROVER_OPT_CACHE_DIR`` to reuse discretized objectives across
invocations. Exit code 0 on success, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .bench import (
    ALGORITHMS,
    MODES,
    ConfigError,
    ExperimentConfig,
    build_objective,
    performance_curve,
    run_batch,
    summarize,
    sweep_functions,
    table_row,
    write_curve_csv,
    write_table_csv,
)
from .localopt import ROUTINES

CACHE_ENV = "GROVER_OPT_CACHE_DIR"


def _add_common(parser: argparse.ArgumentParser, default_mode: str):
    parser.add_argument("--fn", default="griewank", help="test function name")
    parser.add_argument("--n", type=int, default=1, help="number of variables")
    parser.add_argument("--points", type=int, default=2048, help="grid points per axis")
    parser.add_argument("--alg", default="hybrid", choices=ALGORITHMS)
    parser.add_argument("--routine", default="qmodel", choices=sorted(ROUTINES))
    parser.add_argument("--reps", type=int, default=1000, help="repetitions")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--mode", default=default_mode, choices=MODES)
    parser.add_argument("--out", required=True, help="output CSV path")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grover-opt",
        description="Benchmark quantum-assisted global minimization strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run one config, emit a summary row"), "terminated")
    _add_common(sub.add_parser("curve", help="emit a performance curve"), "run-to-optimum")
    table = sub.add_parser("table", help="sweep all functions at one arity")
    _add_common(table, "run-to-optimum")
    table.add_argument(
        "--include-degenerate",
        action="store_true",
        help="also run arities where the printed formula is constant",
    )
    return parser


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        function=args.fn,
        n=args.n,
        points_per_axis=args.points,
        algorithm=args.alg,
        routine=args.routine,
        repetitions=args.reps,
        seed=args.seed,
        mode=args.mode,
    ).validate()


def main(argv: Optional[list] = None) -> int:
    args = _parser().parse_args(argv)
    cache_dir = os.environ.get(CACHE_ENV) or None
    try:
        if args.command == "run":
            cfg = _config(args)
            records = run_batch(cfg, cache_dir=cache_dir)
            write_table_csv([table_row(cfg, summarize(records))], args.out)
        elif args.command == "curve":
            cfg = _config(args)
            records = run_batch(cfg, cache_dir=cache_dir)
            write_curve_csv(performance_curve(records), args.out)
        elif args.command == "table":
            base = _config(args)
            rows = []
            for cfg in sweep_functions(base, args.include_degenerate):
                records = run_batch(cfg, cache_dir=cache_dir)
                rows.append(table_row(cfg, summarize(records)))
            write_table_csv(rows, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
