"""Benchmark matrix runner: solver x budget x scenario x agent count -> CSV rows."""

from __future__ import annotations

import csv
import io
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import Configuration, GridMap, Instance
from .heuristic import distance_tables
from .io import ScenarioRow, dump_paths, load_instance, serialize_map, serialize_scenario
from .lacam import solve_full_horizon
from .metrics import validate
from .pibt import ActionRanker, PolicyTable, distance_ranker, policy_ranker, run_pibt
from .realtime import ExpansionBudget, run_naive_realtime, run_realtime

SOLVERS = ("pibt", "lacam", "rt-lacam", "naive-rt-lacam")
REALTIME_SOLVERS = ("rt-lacam", "naive-rt-lacam")

CSV_FIELDS = (
    "map",
    "scen",
    "n_agents",
    "solver",
    "budget",
    "seed",
    "outcome",
    "total_planning_time_s",
    "heuristic_time_s",
    "iterations",
    "expansions",
    "steps",
    "cost",
    "normalized_cost",
)


@dataclass
class RunSpec:
    map_path: Path
    scen_paths: list[Path]
    agent_counts: list[int]
    solver: str
    budget: ExpansionBudget | None = None
    timeout_s: float = 60.0
    step_limit: int | None = None
    seed: int | None = None
    csv_path: Path | None = None
    paths_dir: Path | None = None
    policy_path: Path | None = None
    record_timing: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {', '.join(SOLVERS)}")
        if self.solver in REALTIME_SOLVERS and self.budget is None:
            raise ValueError(f"solver {self.solver} needs a per-iteration budget")
        if not self.agent_counts or any(n <= 0 for n in self.agent_counts):
            raise ValueError("agent counts must be positive")
        if list(self.agent_counts) != sorted(self.agent_counts):
            raise ValueError("agent counts must be nondecreasing")

    @property
    def uses_wall_clock_budget(self) -> bool:
        return self.budget is not None and self.budget.seconds is not None


@dataclass
class RunRecord:
    map: str
    scen: str
    n_agents: int
    solver: str
    budget: str
    seed: int | None
    outcome: str
    total_planning_time_s: float | None
    heuristic_time_s: float | None
    iterations: int
    expansions: int
    steps: int | None
    cost: int | None
    normalized_cost: float | None
    configs: list[Configuration] = field(default_factory=list, repr=False, compare=False)

    def row(self) -> dict[str, object]:
        d = asdict(self)
        d.pop("configs")
        for key, value in d.items():
            if value is None:
                d[key] = ""
            elif isinstance(value, float):
                d[key] = f"{value:.6f}"
        return d


def make_ranker(instance: Instance, seed: int | None = None, policy: PolicyTable | None = None) -> ActionRanker:
    fallback = distance_ranker(distance_tables(instance), seed)
    return fallback if policy is None else policy_ranker(policy, fallback)


def run_solver(
    instance: Instance,
    solver: str,
    budget: ExpansionBudget | None = None,
    timeout_s: float = 60.0,
    step_limit: int | None = None,
    seed: int | None = None,
    policy: PolicyTable | None = None,
    map_name: str = "",
    scen_name: str = "",
) -> RunRecord:
    """Run one solver on one instance and summarise it as a ``RunRecord``.

    Distance tables are built first and timed separately; the planning clock
    covers the search only.
    """
    t0 = time.perf_counter()
    tables = distance_tables(instance)
    heuristic_time = time.perf_counter() - t0
    ranker = make_ranker(instance, seed, policy)

    iterations = 0
    expansions = 0
    if solver == "pibt":
        res = run_pibt(instance, ranker, step_limit, timeout_s)
        outcome, configs, planning = res.outcome, res.configs, res.planning_time
        iterations = res.iterations
    elif solver == "lacam":
        lres = solve_full_horizon(instance, timeout_s, ranker)
        outcome, configs, planning = lres.outcome, lres.path, lres.planning_time
        iterations, expansions = 1, lres.expansions
    elif solver in REALTIME_SOLVERS:
        assert budget is not None
        run = run_realtime if solver == "rt-lacam" else run_naive_realtime
        rres = run(instance, budget, timeout_s, step_limit, ranker)
        outcome, configs, planning = rres.outcome, rres.configs, rres.planning_time
        iterations, expansions = len(rres.trace.iterations), rres.expansions
    else:
        raise ValueError(f"unknown solver {solver!r}")

    cost = norm = steps = None
    if outcome == "success":
        report = validate(instance, configs)
        if not report.valid:
            raise AssertionError(f"{solver} returned an invalid solution: {report.violations[:3]}")
        cost, norm, steps = report.cost, report.normalized_cost, len(configs) - 1
    if outcome == "timeout":
        planning = timeout_s
    return RunRecord(
        map=map_name,
        scen=scen_name,
        n_agents=instance.n_agents,
        solver=solver,
        budget="" if budget is None or solver not in REALTIME_SOLVERS else str(budget),
        seed=seed,
        outcome=outcome,
        total_planning_time_s=planning,
        heuristic_time_s=heuristic_time,
        iterations=iterations,
        expansions=expansions,
        steps=steps,
        cost=cost,
        normalized_cost=norm,
        configs=configs if outcome == "success" else [],
    )


def _run_job(args: tuple) -> RunRecord:
    spec, scen, n = args
    instance = load_instance(spec.map_path, scen, n)
    policy = PolicyTable.load(spec.policy_path) if spec.policy_path else None
    return run_solver(
        instance,
        spec.solver,
        spec.budget,
        spec.timeout_s,
        spec.step_limit,
        spec.seed,
        policy,
        Path(spec.map_path).name,
        Path(scen).name,
    )


def run_matrix(spec: RunSpec) -> list[RunRecord]:
    """Run every (scenario, agent count) pair, then write CSV and paths if asked.

    Parallel workers are only used without a wall-clock budget; wall-clock
    runs execute serially so timers do not compete.
    """
    jobs = [(spec, scen, n) for scen in spec.scen_paths for n in spec.agent_counts]
    if spec.workers > 1 and not spec.uses_wall_clock_budget:
        with ProcessPoolExecutor(spec.workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(job) for job in jobs]
    if not spec.record_timing:
        for r in records:
            r.total_planning_time_s = r.heuristic_time_s = None
    if spec.csv_path is not None:
        write_csv(records, spec.csv_path)
    if spec.paths_dir is not None:
        for r in records:
            if r.configs:
                stem = Path(r.scen).stem
                dump_paths(r.configs, Path(spec.paths_dir) / f"{stem}_{r.n_agents}_{r.solver}.txt")
    return records


def format_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def write_csv(records: Iterable[RunRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(records))
    return path


def success_rate(records: Sequence[RunRecord]) -> float:
    return sum(r.outcome == "success" for r in records) / len(records) if records else math.nan


def random_map(width: int, height: int, obstacle_ratio: float, rng: np.random.Generator) -> GridMap:
    """Random obstacles, keeping only the largest 4-connected free component."""
    n_blocked = round(obstacle_ratio * width * height)
    free = np.ones(width * height, dtype=bool)
    free[rng.choice(width * height, n_blocked, replace=False)] = False
    grid = GridMap.from_array(free.reshape(height, width))
    component = _largest_component(grid)
    mask = np.zeros((height, width), dtype=bool)
    for x, y in component:
        mask[y, x] = True
    return GridMap.from_array(mask)


def _largest_component(grid: GridMap) -> list[tuple[int, int]]:
    seen: set[tuple[int, int]] = set()
    best: list[tuple[int, int]] = []
    for v in grid.free_cells:
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        for u in comp:
            for w in grid.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
        if len(comp) > len(best):
            best = comp
    return best


def random_scenario_rows(
    grid: GridMap, n_agents: int, rng: np.random.Generator, map_name: str
) -> list[ScenarioRow]:
    """Distinct random starts and goals drawn from the largest component."""
    cells = _largest_component(grid)
    if n_agents > len(cells):
        raise ValueError(f"{n_agents} agents do not fit in {len(cells)} cells")
    starts = rng.choice(len(cells), n_agents, replace=False)
    goals = rng.choice(len(cells), n_agents, replace=False)
    rows = []
    for s, g in zip(starts, goals):
        start, goal = cells[s], cells[g]
        d = distance_tables(Instance.from_configs(grid, [start], [goal]))[0].get(start)
        rows.append(ScenarioRow(int(d // 4), map_name, grid.width, grid.height, start, goal, d))
    return rows


def write_random_benchmark(
    out_dir: str | Path,
    name: str = "random-32-32-20",
    size: int = 32,
    obstacle_ratio: float = 0.2,
    n_scenarios: int = 25,
    rows_per_scenario: int = 200,
    seed: int = 0,
) -> tuple[Path, list[Path]]:
    """Write a seeded random map plus ``n_scenarios`` random ``.scen`` files."""
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = random_map(size, size, obstacle_ratio, rng)
    map_path = out / f"{name}.map"
    map_path.write_text(serialize_map(grid))
    scen_paths = []
    for k in range(1, n_scenarios + 1):
        rows = random_scenario_rows(grid, rows_per_scenario, rng, map_path.name)
        p = out / f"{name}-random-{k}.scen"
        p.write_text(serialize_scenario(rows))
        scen_paths.append(p)
    return map_path, scen_paths
