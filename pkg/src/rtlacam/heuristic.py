"""Per-agent distance-to-goal tables (backward BFS; all edges have unit cost)."""

from __future__ import annotations

import math
import weakref
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .core import Configuration, GridMap, Instance, Vertex


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """Shortest-path lengths to ``goal``; ``inf`` for blocked or unreachable cells.

    ``dist`` is indexed ``[y, x]``.
    """

    agent: int
    goal: Vertex
    dist: NDArray[np.float64]
    _rows: list[list[float]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        # plain lists: the hot loops index these far more often than numpy likes
        object.__setattr__(self, "_rows", self.dist.tolist())

    def get(self, v: Vertex) -> float:
        return self._rows[v[1]][v[0]]

    def __getitem__(self, v: Vertex) -> float:
        return self._rows[v[1]][v[0]]


def backward_bfs(grid: GridMap, goal: Vertex, agent: int = 0) -> DistanceTable:
    if not grid.is_passable(goal):
        raise ValueError(f"goal {goal} is not passable")
    inf = math.inf
    dist = [[inf] * grid.width for _ in range(grid.height)]
    dist[goal[1]][goal[0]] = 0
    queue = deque([goal])
    while queue:
        u = queue.popleft()
        d = dist[u[1]][u[0]] + 1
        for x, y in grid.neighbors(u)[1:]:
            if dist[y][x] == inf:
                dist[y][x] = d
                queue.append((x, y))
    return DistanceTable(agent, goal, np.array(dist, dtype=np.float64))


def reachable(table: DistanceTable, v: Vertex) -> bool:
    return math.isfinite(table.get(v))


_cache: weakref.WeakKeyDictionary[Instance, list[DistanceTable]] = weakref.WeakKeyDictionary()


def distance_tables(instance: Instance) -> list[DistanceTable]:
    """One table per agent, computed once per instance object."""
    tables = _cache.get(instance)
    if tables is None:
        tables = [backward_bfs(instance.map, t.goal, t.id) for t in instance.tasks]
        _cache[instance] = tables
    return tables


def lower_bound(instance: Instance, tables: list[DistanceTable] | None = None) -> float:
    """Sum of individual shortest-path lengths from the starts."""
    tables = distance_tables(instance) if tables is None else tables
    return sum(t.get(s) for t, s in zip(tables, instance.start_config))


def sum_of_distances(tables: list[DistanceTable], config: Configuration) -> float:
    return sum(t.get(v) for t, v in zip(tables, config))
