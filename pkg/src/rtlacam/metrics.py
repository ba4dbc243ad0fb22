"""Solution checking, cost accounting and an exhaustive joint-space oracle.

The oracle shares nothing with the solvers beyond the grid adjacency: it
enumerates joint moves itself and computes its own goal distances, so it can
serve as ground truth for them.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field

from .core import Configuration, GridMap, Instance, Vertex, step_cost
from .heuristic import DistanceTable, distance_tables


class DegenerateNormalizationWarning(UserWarning):
    """Every agent starts on its goal, so the normalized cost is undefined."""


@dataclass(frozen=True)
class Violation:
    timestep: int
    kind: str
    """``vertex``, ``edge``, ``move`` or ``endpoint``."""
    agents: tuple[int, ...]


@dataclass
class SolutionReport:
    valid: bool
    violations: list[Violation] = field(default_factory=list)
    cost: int = 0
    normalized_cost: float | None = None
    degenerate_normalization: bool = False

    def summary(self) -> str:
        lines = [
            f"valid: {self.valid}",
            f"cost: {self.cost}",
            f"normalized_cost: {self.normalized_cost}",
        ]
        lines += [f"violation t={v.timestep} {v.kind} agents={list(v.agents)}" for v in self.violations]
        return "\n".join(lines)


def validate(instance: Instance, configs: Sequence[Configuration]) -> SolutionReport:
    """Check endpoints, moves and collisions of a configuration sequence.

    Transition violations are reported at the timestep of the later
    configuration.  Nothing is raised; problems go into ``violations``.
    """
    if not configs:
        raise ValueError("configs must be nonempty")
    grid, n = instance.map, instance.n_agents
    violations: list[Violation] = []
    for t, config in enumerate(configs):
        if len(config) != n:
            violations.append(Violation(t, "endpoint", ()))
    if violations:
        return SolutionReport(False, violations)

    if configs[0] != instance.start_config:
        bad = tuple(i for i, (a, b) in enumerate(zip(configs[0], instance.start_config)) if a != b)
        violations.append(Violation(0, "endpoint", bad))
    for t, config in enumerate(configs):
        seen: dict[Vertex, int] = {}
        for i, v in enumerate(config):
            if v in seen:
                violations.append(Violation(t, "vertex", (seen[v], i)))
            else:
                seen[v] = i
        if t == 0:
            continue
        prev = configs[t - 1]
        for i, (u, v) in enumerate(zip(prev, config)):
            if not grid.is_passable(v) or not grid.is_passable(u) or v not in grid.neighbors(u):
                violations.append(Violation(t, "move", (i,)))
        where = {u: i for i, u in enumerate(prev)}
        for i, v in enumerate(config):
            j = where.get(v)
            if j is not None and j > i and config[j] == prev[i]:
                violations.append(Violation(t, "edge", (i, j)))
    if configs[-1] != instance.goal_config:
        bad = tuple(
            i for i, (a, b) in enumerate(zip(configs[-1], instance.goal_config)) if a != b
        )
        violations.append(Violation(len(configs) - 1, "endpoint", bad))

    goals = instance.goal_config
    cost = sum(step_cost(goals, a, b) for a, b in zip(configs, configs[1:]))
    report = SolutionReport(not violations, violations, cost)
    if report.valid:
        tables = distance_tables(instance)
        bound = sum(tb.get(s) for tb, s in zip(tables, instance.start_config))
        report.degenerate_normalization = bound == 0
        report.normalized_cost = 1.0 if bound == 0 else cost / bound
    return report


def normalized_cost(
    instance: Instance, cost: int, tables: Sequence[DistanceTable] | None = None
) -> float:
    """``cost`` over the sum of individual shortest-path lengths.

    If every agent starts on its goal the ratio is undefined; 1.0 is returned
    with a ``DegenerateNormalizationWarning``.
    """
    tables = distance_tables(instance) if tables is None else tables
    bound = sum(t.get(s) for t, s in zip(tables, instance.start_config))
    if bound == 0:
        warnings.warn(
            "all agents start at their goals; normalized cost reported as 1.0",
            DegenerateNormalizationWarning,
            stacklevel=2,
        )
        return 1.0
    return cost / bound


@dataclass(frozen=True)
class OracleResult:
    status: str
    """``solved``, ``unsolvable`` or ``too-large``."""
    cost: int | None = None
    makespan: int | None = None
    states: int = 0

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def _goal_distances(grid: GridMap, goal: Vertex) -> dict[Vertex, int]:
    dist = {goal: 0}
    queue = deque([goal])
    while queue:
        u = queue.popleft()
        for v in grid.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _joint_successors(grid: GridMap, config: Configuration):
    """All collision-free one-step successors, by brute-force enumeration."""
    for nxt in itertools.product(*(grid.neighbors(v) for v in config)):
        if len(set(nxt)) != len(nxt):
            continue
        where = {v: i for i, v in enumerate(config)}
        if any(
            (j := where.get(w)) is not None and j != i and nxt[j] == config[i]
            for i, w in enumerate(nxt)
        ):
            continue
        yield nxt


def joint_bfs_oracle(
    instance: Instance, state_cap: int = 10**6, makespan: bool = False
) -> OracleResult:
    """Optimal total cost (free waits on goal) by exhaustive joint-space search.

    Uses A* with the sum of individual distances, which is admissible and
    consistent for this cost, so the result equals uniform-cost search.  With
    ``makespan=True`` a breadth-first search also reports the minimum number
    of timesteps.  Gives up with ``too-large`` after ``state_cap`` states.
    """
    grid = instance.map
    start, goal = instance.start_config, instance.goal_config
    dists = [_goal_distances(grid, g) for g in goal]
    if any(s not in d for s, d in zip(start, dists)):
        return OracleResult("unsolvable")

    def h(c: Configuration) -> int:
        return sum(d[v] for d, v in zip(dists, c))

    best = {start: 0}
    closed: set[Configuration] = set()
    counter = itertools.count()
    heap = [(h(start), next(counter), 0, start)]
    cost = None
    while heap:
        _, _, g, c = heapq.heappop(heap)
        if c in closed:
            continue
        if c == goal:
            cost = g
            break
        closed.add(c)
        if len(closed) > state_cap:
            return OracleResult("too-large", states=len(closed))
        for nxt in _joint_successors(grid, c):
            # unreachable positions (other components) cannot lead to the goal
            if any(v not in d for d, v in zip(dists, nxt)):
                continue
            ng = g + step_cost(goal, c, nxt)
            if ng < best.get(nxt, ng + 1):
                best[nxt] = ng
                heapq.heappush(heap, (ng + h(nxt), next(counter), ng, nxt))
    if cost is None:
        return OracleResult("unsolvable", states=len(closed))
    if not makespan:
        return OracleResult("solved", cost, None, len(closed))

    depth = {start: 0}
    queue = deque([start])
    span = None
    while queue:
        c = queue.popleft()
        if c == goal:
            span = depth[c]
            break
        if len(depth) > state_cap:
            return OracleResult("too-large", cost, None, len(depth))
        for nxt in _joint_successors(grid, c):
            if nxt not in depth:
                depth[nxt] = depth[c] + 1
                queue.append(nxt)
    return OracleResult("solved", cost, span, len(closed))
