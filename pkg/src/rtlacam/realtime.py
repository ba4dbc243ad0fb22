"""Real-time planning and execution on top of a persistent LaCAM search.

Each iteration continues the same ``SearchTree`` for a bounded budget, then
commits one step towards the most recently created node (or along the goal
path once the goal has been reached).  Committing reroots the tree at the new
configuration, so backtracking from any node always ends at the agents' actual
positions.  Because the tree is never discarded the concatenation of all
iterations expands exactly what full-horizon LaCAM would, which is where
completeness comes from.

``run_naive_realtime`` is the baseline that throws the tree away every
iteration; it can livelock.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass, field

from .core import Configuration, ContractError, Instance, UnsolvableError
from .heuristic import distance_tables
from .lacam import Outcome, SearchTree, backtrack_path
from .pibt import ActionRanker, default_step_limit


@dataclass(frozen=True)
class ExpansionBudget:
    """Per-iteration planning budget: a node-expansion count or wall-clock seconds.

    At least one expansion always runs, whatever the budget.
    """

    expansions: int | None = None
    seconds: float | None = None

    def __post_init__(self) -> None:
        if (self.expansions is None) == (self.seconds is None):
            raise ValueError("set exactly one of expansions or seconds")
        if self.expansions is not None and self.expansions < 1:
            raise ValueError("expansion budget must be positive")
        if self.seconds is not None and not self.seconds > 0:
            raise ValueError("time budget must be positive")

    @classmethod
    def count(cls, k: int) -> ExpansionBudget:
        return cls(expansions=k)

    @classmethod
    def millis(cls, ms: float) -> ExpansionBudget:
        return cls(seconds=ms / 1000.0)

    def __str__(self) -> str:
        if self.expansions is not None:
            return f"{self.expansions}exp"
        return f"{self.seconds * 1000:g}ms"


@dataclass(frozen=True)
class IterationStats:
    planning_time: float
    expansions: int
    open_size: int
    explored_size: int


@dataclass
class ExecutionTrace:
    configs: list[Configuration]
    iterations: list[IterationStats] = field(default_factory=list)
    planning_time: float = 0.0
    """Running total over ``iterations``."""
    expansions: int = 0

    def record(self, stats: IterationStats) -> None:
        self.iterations.append(stats)
        self.planning_time += stats.planning_time
        self.expansions += stats.expansions

    @property
    def steps(self) -> int:
        return len(self.configs) - 1


def _search(tree: SearchTree, budget: ExpansionBudget, limit: int | None = None) -> Outcome:
    """Expand until the goal is peeked, Open runs dry, or the budget is spent.

    ``limit`` caps the tree's lifetime expansion count.
    """
    t0 = time.perf_counter()
    done = 0
    while True:
        status = tree.expand_once()
        if status is not Outcome.PROGRESSED:
            return status
        done += 1
        if limit is not None and tree.expansions >= limit:
            return status
        if budget.expansions is not None:
            if done >= budget.expansions:
                return status
        elif time.perf_counter() - t0 >= budget.seconds:
            return status


class RtSession:
    """Real-Time LaCAM state for one instance.

    Invariant between iterations: ``tree.root.config == current``.

    Args:
        instance: Problem to solve.
        ranker: Action ranker for the generator.
        record: Record the tree's ``(configuration, constraints)`` history.
        audit: After every commit, assert that rerooting left the search state
            untouched and that the parent links still form a tree rooted at
            the new configuration.  ``audits`` counts the checks made.

    Raises:
        UnsolvableError: some agent's goal is unreachable.
    """

    def __init__(
        self,
        instance: Instance,
        ranker: ActionRanker | None = None,
        record: bool = False,
        audit: bool = False,
    ) -> None:
        self.instance = instance
        self.tree = SearchTree(instance, ranker, record=record)
        self.audit = audit
        self.audits = 0
        self.current: Configuration = instance.start_config
        self.trace = ExecutionTrace([self.current])
        self.goal_path: list[Configuration] | None = None

    @property
    def at_goal(self) -> bool:
        return self.current == self.tree.goal

    def plan_iteration(self, budget: ExpansionBudget, limit: int | None = None) -> Configuration:
        """Continue the search within ``budget`` and pick the next configuration.

        ``limit`` caps the total expansions of the persistent tree.

        Raises:
            UnsolvableError: Open was exhausted before reaching the goal.
        """
        if self.goal_path is not None:
            self.trace.record(
                IterationStats(0.0, 0, len(self.tree.open), len(self.tree.explored))
            )
            return self.goal_path[0] if self.goal_path else self.current

        tree = self.tree
        before = tree.expansions
        t0 = time.perf_counter()
        status = _search(tree, budget, limit)
        if status is Outcome.GOAL_FOUND:
            assert tree.goal_node is not None
            path = backtrack_path(tree.goal_node)
            self.goal_path = path[1:]
            nxt = path[1] if len(path) > 1 else self.current
        elif status is Outcome.EXHAUSTED:
            nxt = self.current
        else:
            path = backtrack_path(tree.last_created)
            nxt = path[1] if len(path) > 1 else self.current
        elapsed = time.perf_counter() - t0
        self.trace.record(
            IterationStats(elapsed, tree.expansions - before, len(tree.open), len(tree.explored))
        )
        if status is Outcome.EXHAUSTED:
            raise UnsolvableError("search space exhausted without reaching the goal")
        return nxt

    def commit_step(self, nxt: Configuration) -> None:
        """Execute ``nxt`` and reroot the tree there.

        Raises:
            ContractError: ``nxt`` is neither a wait nor an explored configuration
                one valid step away.
        """
        nxt = tuple(nxt)
        before = self.tree.snapshot() if self.audit else None
        if nxt != self.current:
            # the root is the current configuration, so reroot checks the move
            self.tree.reroot(nxt)
        if self.goal_path:
            if self.goal_path[0] != nxt:
                raise ContractError("step leaves the committed goal path")
            self.goal_path.pop(0)
        self.trace.configs.append(nxt)
        self.current = nxt
        if before is not None:
            assert self.tree.snapshot() == before, "commit changed the search state"
            self.tree.check_tree()
            assert self.tree.root.config == nxt, "tree not rooted at the current configuration"
            self.audits += 1


@dataclass
class RtResult:
    outcome: str
    """One of ``success``, ``timeout``, ``unsolvable``, ``step-limit``."""
    trace: ExecutionTrace
    expansions: int = 0
    explored: int = 0
    session: RtSession | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    @property
    def planning_time(self) -> float:
        return self.trace.planning_time

    @property
    def configs(self) -> list[Configuration]:
        return self.trace.configs


def run_realtime(
    instance: Instance,
    budget: ExpansionBudget,
    cumulative_timeout: float = 60.0,
    step_limit: int | None = None,
    ranker: ActionRanker | None = None,
    record: bool = False,
    on_commit: Callable[[RtSession], None] | None = None,
    audit: bool = False,
    max_expansions: int | None = None,
) -> RtResult:
    """Interleave planning and execution until the agents stand on their goals.

    ``on_commit`` is called after every executed step.  ``audit`` turns on the
    session's reroot audit.  ``max_expansions`` caps the total search effort
    deterministically; hitting it before the goal is found reports ``timeout``.
    """
    distance_tables(instance)
    if step_limit is None:
        step_limit = default_step_limit(instance)
    try:
        session = RtSession(instance, ranker, record=record, audit=audit)
    except UnsolvableError:
        return RtResult("unsolvable", ExecutionTrace([instance.start_config]))

    def result(outcome: str) -> RtResult:
        tree = session.tree
        return RtResult(outcome, session.trace, tree.expansions, len(tree.explored), session)

    while not session.at_goal:
        if session.trace.steps >= step_limit:
            return result("step-limit")
        if session.trace.planning_time > cumulative_timeout:
            return result("timeout")
        if (
            max_expansions is not None
            and session.goal_path is None
            and session.tree.expansions >= max_expansions
        ):
            return result("timeout")
        try:
            nxt = session.plan_iteration(budget, max_expansions)
        except UnsolvableError:
            return result("unsolvable")
        session.commit_step(nxt)
        if on_commit is not None:
            on_commit(session)
    return result("success")


def run_naive_realtime(
    instance: Instance,
    budget: ExpansionBudget,
    cumulative_timeout: float = 60.0,
    step_limit: int | None = None,
    ranker: ActionRanker | None = None,
) -> RtResult:
    """Replan from scratch every iteration with a fresh tree rooted at the agents."""
    distance_tables(instance)
    if step_limit is None:
        step_limit = default_step_limit(instance)
    trace = ExecutionTrace([instance.start_config])
    goals = instance.goal_config
    expansions = 0
    while trace.configs[-1] != goals:
        if trace.steps >= step_limit:
            return RtResult("step-limit", trace, expansions)
        if trace.planning_time > cumulative_timeout:
            return RtResult("timeout", trace, expansions)
        current = trace.configs[-1]
        t0 = time.perf_counter()
        try:
            tree = SearchTree(instance, ranker, start=current)
        except UnsolvableError:
            return RtResult("unsolvable", trace, expansions)
        status = _search(tree, budget)
        if status is Outcome.GOAL_FOUND:
            assert tree.goal_node is not None
            path = backtrack_path(tree.goal_node)
        else:
            path = backtrack_path(tree.last_created)
        elapsed = time.perf_counter() - t0
        expansions += tree.expansions
        trace.record(
            IterationStats(elapsed, tree.expansions, len(tree.open), len(tree.explored))
        )
        if status is Outcome.EXHAUSTED:
            return RtResult("unsolvable", trace, expansions)
        trace.configs.append(path[1] if len(path) > 1 else current)
    return RtResult("success", trace, expansions)
