"""Command-line entry point: ``solve``, ``validate`` and ``oracle`` subcommands."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

from .bench import SOLVERS, RunSpec, format_csv, run_matrix
from .core import MapfError
from .io import load_instance, load_paths
from .metrics import joint_bfs_oracle, validate
from .realtime import ExpansionBudget

SOLVE_EPILOG = """\
concurrency: with --workers > 1 instances run in a process pool, but only when
no wall-clock budget is in use.  Runs with --budget-ms always execute serially
so that per-iteration timers do not interfere with each other.
"""


def _agent_counts(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad agent list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtlacam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser(
        "solve",
        help="run a solver over scenarios and agent counts",
        epilog=SOLVE_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    solve.add_argument("--map", required=True, type=Path)
    solve.add_argument("--scen", required=True, type=Path, nargs="+")
    solve.add_argument("--agents", required=True, type=_agent_counts, help="e.g. 50,100,150")
    solve.add_argument("--solver", required=True, choices=SOLVERS)
    budget = solve.add_mutually_exclusive_group()
    budget.add_argument("--budget-ms", type=float, help="per-iteration wall-clock budget")
    budget.add_argument("--budget-expansions", type=int, help="per-iteration expansion budget")
    solve.add_argument("--timeout-s", type=float, default=60.0, help="cumulative planning timeout")
    solve.add_argument("--step-limit", type=int, default=None)
    solve.add_argument("--seed", type=int, default=None, help="seeded tie-breaking in PIBT")
    solve.add_argument("--policy", type=Path, default=None, help="policy table file")
    solve.add_argument("--csv", type=Path, default=None, help="CSV output (stdout if omitted)")
    solve.add_argument("--paths", type=Path, default=None, help="directory for path traces")
    solve.add_argument("--workers", type=int, default=1)
    solve.add_argument(
        "--omit-timing", action="store_true", help="leave timing columns empty (byte-stable CSV)"
    )

    val = sub.add_parser("validate", help="check a path trace file")
    val.add_argument("--map", required=True, type=Path)
    val.add_argument("--scen", required=True, type=Path)
    val.add_argument("--agents", required=True, type=int)
    val.add_argument("--paths", required=True, type=Path)

    orc = sub.add_parser("oracle", help="optimal cost by exhaustive joint-space search")
    orc.add_argument("--map", required=True, type=Path)
    orc.add_argument("--scen", required=True, type=Path)
    orc.add_argument("--agents", required=True, type=int)
    orc.add_argument("--cap", type=int, default=10**6)
    return parser


def _solve(args: argparse.Namespace) -> int:
    budget = None
    if args.budget_ms is not None:
        budget = ExpansionBudget.millis(args.budget_ms)
    elif args.budget_expansions is not None:
        budget = ExpansionBudget.count(args.budget_expansions)
    spec = RunSpec(
        map_path=args.map,
        scen_paths=list(args.scen),
        agent_counts=args.agents,
        solver=args.solver,
        budget=budget,
        timeout_s=args.timeout_s,
        step_limit=args.step_limit,
        seed=args.seed,
        csv_path=args.csv,
        paths_dir=args.paths,
        policy_path=args.policy,
        record_timing=not args.omit_timing,
        workers=args.workers,
    )
    records = run_matrix(spec)
    if args.csv is None:
        sys.stdout.write(format_csv(records))
    return 0


def _validate(args: argparse.Namespace) -> int:
    instance = load_instance(args.map, args.scen, args.agents)
    configs = load_paths(args.paths)
    if len(configs[0]) != instance.n_agents:
        raise MapfError(f"path file has {len(configs[0])} agents, expected {instance.n_agents}")
    report = validate(instance, configs)
    print(report.summary())
    print("valid,cost,normalized_cost,violations")
    norm = "" if report.normalized_cost is None else f"{report.normalized_cost:.6f}"
    print(f"{int(report.valid)},{report.cost},{norm},{len(report.violations)}")
    return 0 if report.valid else 1


def _oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.map, args.scen, args.agents)
    res = joint_bfs_oracle(instance, args.cap)
    print(f"status: {res.status}")
    print(f"cost: {'' if res.cost is None else res.cost}")
    print(f"states: {res.states}")
    return 0 if res.solved else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"solve": _solve, "validate": _validate, "oracle": _oracle}[args.command]
    try:
        return handler(args)
    except (OSError, MapfError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
