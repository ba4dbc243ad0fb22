"""LaCAM: lazy depth-first search over joint configurations.

Each high-level node owns a FIFO of low-level nodes.  A low-level node pins the
first ``k`` agents of the node's agent order (highest priority first, frozen
when the node is created) to specific vertices; consuming one spawns its
children for the next agent in that order before the generator runs.  Expanding a node
therefore yields a single successor per call, and every revisit of an explored
configuration pushes it back on the Open stack so that its next expansion is
made under a fresh, stronger constraint.  The search is complete: in the worst
case all joint successors of every configuration get enumerated.

``SearchTree`` is deliberately stepwise (``expand_once``) so that the
real-time wrapper can spread a single search across many planning iterations.
"""

from __future__ import annotations

import enum
import time
from collections import Counter, deque
from dataclasses import dataclass, field

from .core import Configuration, ContractError, Instance, UnsolvableError, valid_transition
from .heuristic import distance_tables, reachable
from .pibt import (
    ActionRanker,
    Constraint,
    PriorityState,
    distance_ranker,
    generate,
    initial_priorities,
    priority_order,
    update_priorities,
)


class Outcome(enum.Enum):
    GOAL_FOUND = "goal-found"
    PROGRESSED = "progressed"
    EXHAUSTED = "open-exhausted"


@dataclass(frozen=True)
class LowLevelNode:
    """Positional constraints for the first ``depth`` agents of a node's order."""

    assignment: tuple[Constraint, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.assignment)


class HighLevelNode:
    """One explored configuration.

    ``parent`` is fixed at creation and only ever rewritten by rerooting.
    """

    __slots__ = ("config", "parent", "low_level", "priorities", "order", "serial")

    def __init__(
        self,
        config: Configuration,
        parent: HighLevelNode | None,
        priorities: PriorityState,
        serial: int,
    ) -> None:
        self.config = config
        self.parent = parent
        self.low_level: deque[LowLevelNode] = deque([LowLevelNode()])
        self.priorities = priorities
        self.order = tuple(priority_order(priorities))
        self.serial = serial

    def __repr__(self) -> str:
        parent = None if self.parent is None else self.parent.serial
        return f"HighLevelNode(#{self.serial}, {self.config}, parent=#{parent})"


def backtrack_path(node: HighLevelNode) -> list[Configuration]:
    """Configurations from the tree root down to ``node``, root first."""
    path = []
    cur: HighLevelNode | None = node
    while cur is not None:
        path.append(cur.config)
        cur = cur.parent
    path.reverse()
    return path


@dataclass(frozen=True)
class TreeSnapshot:
    """Everything about a tree that rerooting must leave untouched."""

    nodes: frozenset[Configuration]
    queues: dict[Configuration, tuple[LowLevelNode, ...]]
    open_stack: tuple[Configuration, ...]
    priorities: dict[Configuration, PriorityState]
    creation_counter: int
    last_created: Configuration

    @property
    def open_multiset(self) -> Counter[Configuration]:
        return Counter(self.open_stack)


class SearchTree:
    """Persistent LaCAM search state.

    Args:
        instance: Problem to solve.
        ranker: Action ranker for the generator; defaults to goal distance.
        start: Root configuration, defaults to the instance's starts.
        record: Keep ``history``, the ``(configuration, constraints)`` pair
            consumed by every generator call.

    Raises:
        UnsolvableError: some agent's goal is unreachable from ``start``.
    """

    def __init__(
        self,
        instance: Instance,
        ranker: ActionRanker | None = None,
        start: Configuration | None = None,
        record: bool = False,
    ) -> None:
        self.instance = instance
        self.grid = instance.map
        self.goal = instance.goal_config
        tables = distance_tables(instance)
        start = instance.start_config if start is None else tuple(start)
        for table, v in zip(tables, start):
            if not reachable(table, v):
                raise UnsolvableError(f"agent {table.agent}: goal {table.goal} unreachable from {v}")
        self.ranker = distance_ranker(tables) if ranker is None else ranker
        self.root = HighLevelNode(start, None, initial_priorities(len(start)), 0)
        self.explored: dict[Configuration, HighLevelNode] = {start: self.root}
        self.open: list[HighLevelNode] = [self.root]
        self.creation_counter = 0
        self.last_created = self.root
        self.goal_node: HighLevelNode | None = None
        self.expansions = 0
        self.history: list[tuple[Configuration, tuple[Constraint, ...]]] | None = (
            [] if record else None
        )

    def expand_once(self) -> Outcome:
        """Run one LaCAM iteration.

        Nodes left on Open with an exhausted constraint queue (re-pushed by a
        revisit) are discarded without counting as an expansion.
        """
        open_ = self.open
        while True:
            if not open_:
                return Outcome.EXHAUSTED
            node = open_[-1]
            if node.config == self.goal:
                self.goal_node = node
                return Outcome.GOAL_FOUND
            if node.low_level:
                break
            open_.pop()

        low = node.low_level.popleft()
        k = low.depth
        if k < len(node.config):
            agent = node.order[k]
            for v in self.grid.neighbors(node.config[agent]):
                node.low_level.append(LowLevelNode(low.assignment + (Constraint(agent, v),)))
        if not node.low_level:
            open_.pop()

        self.expansions += 1
        if self.history is not None:
            self.history.append((node.config, low.assignment))
        succ = generate(
            self.grid, node.config, low.assignment, node.priorities, self.ranker, node.order
        )
        if succ is None:
            return Outcome.PROGRESSED
        existing = self.explored.get(succ)
        if existing is not None:
            open_.append(existing)
            return Outcome.PROGRESSED
        self.creation_counter += 1
        child = HighLevelNode(
            succ,
            node,
            update_priorities(node.priorities, succ, self.goal),
            self.creation_counter,
        )
        self.explored[succ] = child
        open_.append(child)
        self.last_created = child
        return Outcome.PROGRESSED

    def node(self, config: Configuration) -> HighLevelNode:
        try:
            return self.explored[config]
        except KeyError:
            raise ContractError(f"configuration {config} is not in the search tree") from None

    def reroot(self, config: Configuration) -> None:
        """Make ``config``'s node the root by reversing the edge from the old root.

        Only the two affected parent pointers change.
        """
        new_root = self.node(config)
        if new_root is self.root:
            return
        if not valid_transition(self.grid, self.root.config, config):
            raise ContractError(f"{config} is not one step from the root {self.root.config}")
        old_root = self.root
        new_root.parent = None
        old_root.parent = new_root
        self.root = new_root

    def snapshot(self) -> TreeSnapshot:
        return TreeSnapshot(
            nodes=frozenset(self.explored),
            queues={c: tuple(n.low_level) for c, n in self.explored.items()},
            open_stack=tuple(n.config for n in self.open),
            priorities={c: n.priorities for c, n in self.explored.items()},
            creation_counter=self.creation_counter,
            last_created=self.last_created.config,
        )

    def check_tree(self) -> None:
        """Raise ``AssertionError`` unless parent links form a tree rooted at ``root``.

        Also checks that every parent/child pair is a valid transition and that
        Open only references explored nodes.
        """
        assert self.root.parent is None, "root has a parent"
        assert self.explored.get(self.root.config) is self.root, "root not in explored table"
        # 0 = unvisited, 1 = on current walk, 2 = known to reach root
        state: dict[int, int] = {id(self.root): 2}
        for node in self.explored.values():
            walk = []
            cur = node
            while state.get(id(cur), 0) == 0:
                state[id(cur)] = 1
                walk.append(cur)
                parent = cur.parent
                assert parent is not None, f"{cur!r} is detached from the root"
                assert self.explored.get(parent.config) is parent, f"{parent!r} not explored"
                assert valid_transition(self.grid, parent.config, cur.config), (
                    f"invalid edge {parent!r} -> {cur!r}"
                )
                cur = parent
            assert state[id(cur)] == 2, f"cycle through {cur!r}"
            for w in walk:
                state[id(w)] = 2
        for node in self.open:
            assert self.explored.get(node.config) is node, f"open holds unknown {node!r}"


def init_tree(
    instance: Instance, ranker: ActionRanker | None = None, record: bool = False
) -> SearchTree:
    return SearchTree(instance, ranker, record=record)


def expand_once(tree: SearchTree) -> Outcome:
    return tree.expand_once()


@dataclass
class LacamResult:
    outcome: str
    """One of ``success``, ``timeout``, ``unsolvable``."""
    path: list[Configuration] = field(default_factory=list)
    expansions: int = 0
    explored: int = 0
    planning_time: float = 0.0
    tree: SearchTree | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.outcome == "success"


def solve_full_horizon(
    instance: Instance,
    timeout: float = 60.0,
    ranker: ActionRanker | None = None,
    record: bool = False,
    max_expansions: int | None = None,
) -> LacamResult:
    """Search until the goal configuration is reached, then return the whole path.

    The clock excludes building the distance tables.  ``max_expansions`` is a
    deterministic alternative to the timeout: reaching it also reports
    ``timeout``.
    """
    distance_tables(instance)
    t0 = time.perf_counter()
    try:
        tree = SearchTree(instance, ranker, record=record)
    except UnsolvableError:
        return LacamResult("unsolvable", planning_time=time.perf_counter() - t0)
    outcome = "timeout"
    while time.perf_counter() - t0 <= timeout:
        if max_expansions is not None and tree.expansions >= max_expansions:
            break
        status = tree.expand_once()
        if status is Outcome.GOAL_FOUND:
            outcome = "success"
            break
        if status is Outcome.EXHAUSTED:
            outcome = "unsolvable"
            break
    elapsed = time.perf_counter() - t0
    path = backtrack_path(tree.goal_node) if tree.goal_node is not None else []
    return LacamResult(outcome, path, tree.expansions, len(tree.explored), elapsed, tree)
