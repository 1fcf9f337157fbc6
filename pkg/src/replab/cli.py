"""Command line entry point.

Usage:
    replab list
    replab <experiment> [--<param> value ...] [--seed S] [--workers W]
           [--output out.csv] [--format csv|json]

Exit codes: 0 success, 2 parameter/domain error, 3 capacity error,
4 retry exhausted.  REPLAB_BUDGET overrides enumeration budgets.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CapacityError, DomainError, ParameterError, RetryExhaustedError
from .experiments import REGISTRY, ExperimentConfig, list_experiments, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replab",
                                     description="random graph coloring experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    for spec in list_experiments():
        p = sub.add_parser(spec.name, help=spec.description)
        for name, pspec in spec.params.items():
            default_note = "" if pspec.default is None else f" (default {pspec.default})"
            p.add_argument(f"--{name}", default=None, help=pspec.help + default_note)
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--workers", type=int, default=1, help="worker streams (default 1)")
        p.add_argument("--output", default=None, help="write report to this path")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for spec in list_experiments():
            params = ", ".join(spec.params)
            print(f"{spec.name}: {spec.description}")
            print(f"    params: {params}")
        return 0
    spec = REGISTRY[args.command]
    params = {
        name: getattr(args, name)
        for name in spec.params
        if getattr(args, name) is not None
    }
    config = ExperimentConfig(
        experiment=args.command,
        params=params,
        seed=args.seed,
        workers=args.workers,
        output=args.output,
        fmt=args.fmt,
    )
    try:
        report = run(config)
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RetryExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(f"# {report.experiment} seed={report.seed} workers={report.workers} "
          f"wall={report.wall_time:.2f}s")
    for note in report.notes:
        print(f"# note: {note}")
    for row in report.rows:
        flag = "exact" if row.exact else f"stderr={row.stderr:.4g}"
        print(f"{row.name}: {row.estimate:.8g} ({flag}, n={row.n_samples})")
    if config.output:
        print(f"# wrote {config.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
