"""Grid, agent and configuration model shared by every solver.

Coordinates follow the MovingAI convention: a vertex is ``(x, y)`` with ``x``
the column and ``y`` the row, origin at the top-left corner.  A configuration
is a plain tuple of vertices, one per agent, so equality and hashing come from
the ordered position list.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray

Vertex: TypeAlias = tuple[int, int]
Configuration: TypeAlias = tuple[Vertex, ...]

# (dx, dy) in the fixed action order: stay, -y, +x, +y, -x
ACTIONS: tuple[Vertex, ...] = ((0, 0), (0, -1), (1, 0), (0, 1), (-1, 0))
ACTION_NAMES: tuple[str, ...] = ("stay", "up", "right", "down", "left")


class MapfError(Exception):
    """Base class for errors raised by this package."""


class InstanceError(MapfError, ValueError):
    """An instance violates a structural invariant (bad start/goal, duplicates)."""


class UnsolvableError(MapfError):
    """The instance provably has no solution."""


class ContractError(MapfError):
    """A caller broke an operation's precondition."""


@dataclass(frozen=True, eq=False)
class GridMap:
    """Static 4-connected grid.

    Attributes:
        width: Number of columns.
        height: Number of rows.
        passable: Row-major passability flags, ``passable[y * width + x]``.
    """

    width: int
    height: int
    passable: tuple[bool, ...]
    _adjacency: dict[Vertex, tuple[Vertex, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if len(self.passable) != self.width * self.height:
            raise ValueError(
                f"passable has {len(self.passable)} cells, expected {self.width * self.height}"
            )
        object.__setattr__(self, "passable", tuple(bool(p) for p in self.passable))
        adjacency: dict[Vertex, tuple[Vertex, ...]] = {}
        for y in range(self.height):
            for x in range(self.width):
                if not self.passable[y * self.width + x]:
                    continue
                adjacency[(x, y)] = tuple(
                    (x + dx, y + dy)
                    for dx, dy in ACTIONS
                    if self.is_passable((x + dx, y + dy))
                )
        object.__setattr__(self, "_adjacency", adjacency)

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> GridMap:
        """Build a grid from strings where ``.`` is free and anything else blocked."""
        height = len(rows)
        width = len(rows[0]) if rows else 0
        if any(len(r) != width for r in rows):
            raise ValueError("rows must all have the same length")
        return cls(width, height, tuple(c == "." for r in rows for c in r))

    @classmethod
    def from_array(cls, free: NDArray[np.bool_]) -> GridMap:
        """Build a grid from a ``(height, width)`` boolean array of free cells."""
        free = np.asarray(free, dtype=bool)
        height, width = free.shape
        return cls(width, height, tuple(free.ravel().tolist()))

    def to_array(self) -> NDArray[np.bool_]:
        """Passability as a ``(height, width)`` boolean array."""
        return np.array(self.passable, dtype=bool).reshape(self.height, self.width)

    def in_bounds(self, v: Vertex) -> bool:
        x, y = v
        return 0 <= x < self.width and 0 <= y < self.height

    def is_passable(self, v: Vertex) -> bool:
        x, y = v
        return 0 <= x < self.width and 0 <= y < self.height and self.passable[y * self.width + x]

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        """``v`` itself followed by its passable cardinal neighbours (fixed order)."""
        return self._adjacency[v]

    @property
    def free_cells(self) -> list[Vertex]:
        return list(self._adjacency)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.width, self.height, self.passable) == (
            other.width,
            other.height,
            other.passable,
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.passable))


@dataclass(frozen=True)
class AgentTask:
    id: int
    start: Vertex
    goal: Vertex


@dataclass(frozen=True, eq=False)
class Instance:
    """A MAPF problem: a map plus one start/goal pair per agent."""

    map: GridMap
    tasks: tuple[AgentTask, ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        for i, task in enumerate(self.tasks):
            if task.id != i:
                raise InstanceError(f"task at position {i} has id {task.id}")
            for label, v in (("start", task.start), ("goal", task.goal)):
                if not self.map.is_passable(v):
                    raise InstanceError(f"agent {i}: {label} {v} is not a passable cell")
        _check_distinct(self.start_config, "start")
        _check_distinct(self.goal_config, "goal")

    @classmethod
    def from_configs(
        cls, grid: GridMap, starts: Iterable[Vertex], goals: Iterable[Vertex], name: str = ""
    ) -> Instance:
        tasks = tuple(
            AgentTask(i, tuple(s), tuple(g)) for i, (s, g) in enumerate(zip(starts, goals, strict=True))
        )
        return cls(grid, tasks, name)

    @property
    def n_agents(self) -> int:
        return len(self.tasks)

    @property
    def start_config(self) -> Configuration:
        return tuple(t.start for t in self.tasks)

    @property
    def goal_config(self) -> Configuration:
        return tuple(t.goal for t in self.tasks)

    def with_start(self, config: Configuration) -> Instance:
        """Same map and goals, agents starting from ``config``."""
        return Instance.from_configs(self.map, config, self.goal_config, self.name)


def _check_distinct(config: Configuration, label: str) -> None:
    seen: dict[Vertex, int] = {}
    for i, v in enumerate(config):
        if v in seen:
            raise InstanceError(f"agents {seen[v]} and {i} share {label} {v}")
        seen[v] = i


def neighbors(grid: GridMap, v: Vertex) -> list[Vertex]:
    """Vertices reachable from ``v`` in one timestep, staying first.

    Order is stay, -y, +x, +y, -x, skipping blocked or out-of-bounds cells.
    """
    return list(grid.neighbors(v))


def is_collision_free(config: Configuration) -> bool:
    return len(set(config)) == len(config)


def valid_transition(grid: GridMap, src: Configuration, dst: Configuration) -> bool:
    """Whether all agents can move from ``src`` to ``dst`` in one timestep.

    Every agent must stay or take one cardinal step onto a passable cell, no two
    agents may end on the same vertex and no pair may swap vertices.  ``src``
    must itself be collision-free, which keeps the relation symmetric.
    """
    n = len(src)
    if len(dst) != n or len(set(src)) != n or len(set(dst)) != n:
        return False
    adjacency = grid._adjacency
    for u, v in zip(src, dst):
        nbrs = adjacency.get(u)
        if nbrs is None or v not in nbrs:
            return False
    occupant = {v: i for i, v in enumerate(dst)}
    # a swap i<->j means dst[j] == src[i] and dst[i] == src[j]
    for i, u in enumerate(src):
        j = occupant.get(u)
        if j is not None and j != i and dst[i] == src[j]:
            return False
    return True


def step_cost(goals: Configuration, src: Configuration, dst: Configuration) -> int:
    """Unit cost per agent, except agents that stay on their goal pay nothing."""
    return sum(not (u == v == g) for u, v, g in zip(src, dst, goals))


def path_cost(goals: Configuration, configs: Sequence[Configuration]) -> int:
    return sum(step_cost(goals, a, b) for a, b in zip(configs, configs[1:]))
