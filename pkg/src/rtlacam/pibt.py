"""One-step configuration generator: Priority Inheritance with Backtracking.

``generate`` is the successor function LaCAM calls.  It accepts positional
constraints for a subset of agents and plans the rest with PIBT, so the output
is always a collision-free transition (which is what makes a ranker-driven
variant a collision shield).  Action preferences come from a pluggable ranker:
``distance_ranker`` reproduces classic PIBT, ``policy_ranker`` replays a table
of per-cell action weights such as a learned policy's outputs.
"""

from __future__ import annotations

import hashlib
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import NamedTuple, TypeAlias

from .core import ACTIONS, Configuration, GridMap, Instance, Vertex
from .heuristic import DistanceTable, distance_tables, reachable

ActionRanker: TypeAlias = Callable[[int, Vertex, Sequence[Vertex]], list[Vertex]]
"""``(agent, current vertex, candidates) -> candidates in preference order``."""

PriorityState: TypeAlias = tuple[int, ...]
"""Per-agent steps elapsed since the agent last stood on its goal."""


class Constraint(NamedTuple):
    agent: int
    vertex: Vertex


def initial_priorities(n_agents: int) -> PriorityState:
    return (0,) * n_agents


def update_priorities(
    priorities: PriorityState, new_config: Configuration, goals: Configuration
) -> PriorityState:
    """Reset agents standing on their goal to 0, increment everyone else."""
    return tuple(0 if v == g else p + 1 for p, v, g in zip(priorities, new_config, goals))


def priority_order(priorities: PriorityState) -> list[int]:
    """Agents from highest to lowest priority: most elapsed first, then lowest id."""
    return sorted(range(len(priorities)), key=lambda i: (-priorities[i], i))


def generate(
    grid: GridMap,
    config: Configuration,
    constraints: Sequence[Constraint],
    priorities: PriorityState,
    ranker: ActionRanker,
    order: Sequence[int] | None = None,
) -> Configuration | None:
    """Produce one successor of ``config`` honouring ``constraints``.

    Constrained agents are pinned first.  The remaining agents are planned in
    priority order with PIBT: an agent takes its best free candidate, and if an
    unplanned agent currently sits there, that agent inherits the priority and
    must move away first; when it cannot, the caller falls through to its next
    candidate.

    ``order`` may pass ``priority_order(priorities)`` when already known.

    Returns:
        The successor configuration, or ``None`` when the constraints cannot
        be completed into a valid transition.
    """
    n = len(config)
    nxt: list[Vertex | None] = [None] * n
    occupied_now = {v: i for i, v in enumerate(config)}
    occupied_next: dict[Vertex, int] = {}

    for agent, v in constraints:
        if nxt[agent] is not None or v in occupied_next or v not in grid.neighbors(config[agent]):
            return None
        j = occupied_now.get(v)
        if j is not None and j != agent and nxt[j] == config[agent]:
            return None
        nxt[agent] = v
        occupied_next[v] = agent

    adj = grid._adjacency
    # rankers may expose their memo, memo[agent][v] = (candidates, ranked), to skip a call
    memo = getattr(ranker, "memo", None)

    def ranked(i: int, here: Vertex) -> Sequence[Vertex]:
        cands = adj[here]
        if memo is not None:
            hit = memo[i].get(here)
            if hit is not None and hit[0] is cands:
                return hit[1]
        return ranker(i, here, cands)

    def pibt(i: int) -> bool:
        here = config[i]
        for v in ranked(i, here):
            if v in occupied_next:
                continue
            j = occupied_now.get(v)
            if j is not None and nxt[j] == here:
                continue
            nxt[i] = v
            occupied_next[v] = i
            if j is not None and j != i and nxt[j] is None and not pibt(j):
                continue
            return True
        nxt[i] = here
        occupied_next[here] = i
        return False

    for i in priority_order(priorities) if order is None else order:
        if nxt[i] is None:
            # shortcut for the common case that the first choice is free outright
            here = config[i]
            hit = memo[i].get(here) if memo is not None else None
            if hit is not None and hit[0] is adj[here]:
                v = hit[1][0]
            else:
                v = ranked(i, here)[0]
            if v not in occupied_next and (v == here or v not in occupied_now):
                nxt[i] = v
                occupied_next[v] = i
            else:
                pibt(i)

    result: Configuration = tuple(nxt)  # type: ignore[arg-type]
    # a failed agent staying put may land on a pinned agent's target
    if len(set(result)) != n:
        return None
    final = {v: i for i, v in enumerate(result)}
    for i, u in enumerate(config):
        j = final.get(u)
        if j is not None and j != i and result[i] == config[j]:
            return None
    return result


def _tie_break_key(seed: int, agent: int, v: Vertex, w: Vertex) -> int:
    digest = hashlib.blake2b(f"{seed}:{agent}:{v}:{w}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def distance_ranker(tables: Sequence[DistanceTable], seed: int | None = None) -> ActionRanker:
    """Prefer candidates closer to the agent's goal.

    Ties keep the fixed action order, or with ``seed`` are shuffled by a hash
    of ``(seed, agent, vertex, candidate)`` so the ranker stays a pure function.
    Rankings are memoized per ``(agent, vertex)``.
    """
    memo: list[dict[Vertex, tuple[Sequence[Vertex], list[Vertex]]]] = [{} for _ in tables]

    def rank(agent: int, v: Vertex, candidates: Sequence[Vertex]) -> list[Vertex]:
        hit = memo[agent].get(v)
        if hit is not None and (hit[0] is candidates or hit[0] == candidates):
            return hit[1]
        get = tables[agent].get
        if seed is None:
            ranked = sorted(candidates, key=get)
        else:
            ranked = sorted(candidates, key=lambda w: (get(w), _tie_break_key(seed, agent, v, w)))
        memo[agent][v] = (candidates, ranked)
        return ranked

    rank.memo = memo  # type: ignore[attr-defined]
    return rank


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyTable:
    """Action weights per ``(agent, vertex)`` in the order stay, up, right, down, left."""

    weights: dict[tuple[int, Vertex], tuple[float, ...]]

    def __post_init__(self) -> None:
        for key, w in self.weights.items():
            if len(w) != len(ACTIONS):
                raise PolicyError(f"{key}: expected {len(ACTIONS)} weights, got {len(w)}")
            if any(not math.isfinite(x) or x < 0 for x in w):
                raise PolicyError(f"{key}: weights must be finite and nonnegative, got {w}")

    @classmethod
    def parse(cls, text: str) -> PolicyTable:
        """Read lines of ``agent_id x y w_stay w_up w_right w_down w_left``."""
        weights: dict[tuple[int, Vertex], tuple[float, ...]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3 + len(ACTIONS):
                raise PolicyError(f"line {lineno}: expected 8 fields, got {len(parts)}")
            try:
                agent, x, y = (int(p) for p in parts[:3])
                w = tuple(float(p) for p in parts[3:])
            except ValueError as exc:
                raise PolicyError(f"line {lineno}: {exc}") from None
            if any(not math.isfinite(v) or v < 0 for v in w):
                raise PolicyError(f"line {lineno}: weights must be finite and nonnegative")
            weights[(agent, (x, y))] = w
        return cls(weights)

    @classmethod
    def load(cls, path: str | PathLike[str]) -> PolicyTable:
        return cls.parse(Path(path).read_text())

    def dumps(self) -> str:
        return "".join(
            f"{a} {x} {y} " + " ".join(repr(v) for v in w) + "\n"
            for (a, (x, y)), w in sorted(self.weights.items())
        )

    @classmethod
    def from_distance_tables(
        cls, grid: GridMap, tables: Sequence[DistanceTable], temperature: float = 1.0
    ) -> PolicyTable:
        """Softmax over negated goal distance; impossible actions get weight 0."""
        weights: dict[tuple[int, Vertex], tuple[float, ...]] = {}
        for table in tables:
            for v in grid.free_cells:
                scores = []
                for dx, dy in ACTIONS:
                    w = (v[0] + dx, v[1] + dy)
                    d = table.get(w) if grid.is_passable(w) else math.inf
                    scores.append(-d / temperature)
                top = max(scores)
                if top == -math.inf:
                    probs = [1.0 / len(ACTIONS)] * len(ACTIONS)
                else:
                    exps = [math.exp(s - top) for s in scores]
                    total = sum(exps)
                    probs = [e / total for e in exps]
                weights[(table.agent, v)] = tuple(probs)
        return cls(weights)


def policy_ranker(policy: PolicyTable, fallback: ActionRanker | None = None) -> ActionRanker:
    """Prefer candidates whose action has the larger policy weight.

    Ties keep the fixed action order.  Cells missing from the table defer to
    ``fallback`` (or keep candidate order if none is given).
    """
    weights = policy.weights

    def rank(agent: int, v: Vertex, candidates: Sequence[Vertex]) -> list[Vertex]:
        w = weights.get((agent, v))
        if w is None:
            return fallback(agent, v, candidates) if fallback is not None else list(candidates)

        def key(c: Vertex) -> float:
            return -w[ACTIONS.index((c[0] - v[0], c[1] - v[1]))]

        return sorted(candidates, key=key)

    return rank


@dataclass
class PibtResult:
    outcome: str
    configs: list[Configuration]
    planning_time: float
    iterations: int


def run_pibt(
    instance: Instance,
    ranker: ActionRanker | None = None,
    step_limit: int | None = None,
    cumulative_timeout: float = 60.0,
) -> PibtResult:
    """Iterate ``generate`` without constraints until every agent is home.

    PIBT alone is incomplete: failure shows up as ``step-limit`` or ``timeout``.
    Only a goal that is unreachable on the map yields ``unsolvable``.
    """
    tables = distance_tables(instance)
    if not all(reachable(t, s) for t, s in zip(tables, instance.start_config)):
        return PibtResult("unsolvable", [instance.start_config], 0.0, 0)
    ranker = distance_ranker(tables) if ranker is None else ranker
    grid, goals = instance.map, instance.goal_config
    if step_limit is None:
        step_limit = default_step_limit(instance)
    configs = [instance.start_config]
    priorities = initial_priorities(instance.n_agents)
    elapsed = 0.0
    while configs[-1] != goals:
        if len(configs) - 1 >= step_limit:
            return PibtResult("step-limit", configs, elapsed, len(configs) - 1)
        if elapsed > cumulative_timeout:
            return PibtResult("timeout", configs, elapsed, len(configs) - 1)
        t0 = time.perf_counter()
        nxt = generate(grid, configs[-1], (), priorities, ranker)
        elapsed += time.perf_counter() - t0
        # without constraints PIBT always yields a successor
        assert nxt is not None
        priorities = update_priorities(priorities, nxt, goals)
        configs.append(nxt)
    return PibtResult("success", configs, elapsed, len(configs) - 1)


def default_step_limit(instance: Instance) -> int:
    return 10 * instance.map.width * instance.map.height * max(instance.n_agents, 1)

