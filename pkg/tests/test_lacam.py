import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtlacam import GridMap, Instance, valid_transition
from rtlacam.core import ContractError, UnsolvableError
from rtlacam.heuristic import lower_bound
from rtlacam.lacam import HighLevelNode, Outcome, SearchTree, backtrack_path, solve_full_horizon
from rtlacam.metrics import joint_bfs_oracle, validate

from conftest import bulge_swap, corridor, random_instance


def run_to_end(tree: SearchTree, cap: int = 100_000) -> Outcome:
    for _ in range(cap):
        status = tree.expand_once()
        if status is not Outcome.PROGRESSED:
            return status
    raise AssertionError("search did not terminate")


def constraint_tree_size(grid: GridMap, config, order) -> int:
    """Number of low-level nodes in a fully grown constraint tree."""
    total, width = 1, 1
    for agent in order:
        width *= len(grid.neighbors(config[agent]))
        total += width
    return total


class TestBacktrackPath:
    def test_root_only(self):
        root = HighLevelNode(((0, 0),), None, (0,), 0)
        assert backtrack_path(root) == [((0, 0),)]

    def test_chain(self):
        b = HighLevelNode(((0, 0),), None, (0,), 0)
        e = HighLevelNode(((1, 0),), b, (1,), 1)
        f = HighLevelNode(((2, 0),), e, (2,), 2)
        assert backtrack_path(f) == [((0, 0),), ((1, 0),), ((2, 0),)]
        assert backtrack_path(e) == [((0, 0),), ((1, 0),)]


class TestExpandOnce:
    def test_single_agent_two_cells(self):
        inst = Instance.from_configs(corridor(2), [(0, 0)], [(1, 0)])
        tree = SearchTree(inst)
        assert tree.expand_once() is Outcome.PROGRESSED
        assert tree.last_created.config == ((1, 0),)
        # the goal is tested when the node reaches the top of Open
        assert tree.expand_once() is Outcome.GOAL_FOUND
        assert backtrack_path(tree.goal_node) == [((0, 0),), ((1, 0),)]
        assert tree.expansions == 1

    def test_already_at_goal(self):
        inst = Instance.from_configs(corridor(3), [(1, 0)], [(1, 0)])
        res = solve_full_horizon(inst)
        assert res.success and res.path == [((1, 0),)] and res.expansions == 0

    def test_children_enqueued_before_generation(self):
        inst = Instance.from_configs(corridor(3), [(0, 0), (2, 0)], [(2, 0), (0, 0)])
        tree = SearchTree(inst, record=True)
        tree.expand_once()
        root = tree.root
        first = root.order[0]
        assert [low.assignment for low in root.low_level] == [
            ((first, v),) for v in inst.map.neighbors(root.config[first])
        ]
        assert tree.history == [(root.config, ())]

    def test_revisit_keeps_parent_and_reuses_node(self):
        inst = Instance.from_configs(corridor(3), [(0, 0), (2, 0)], [(2, 0), (0, 0)])
        tree = SearchTree(inst)
        parents = {}
        while tree.expand_once() is Outcome.PROGRESSED:
            for cfg, node in tree.explored.items():
                parents.setdefault(cfg, node.parent)
                assert node.parent is parents[cfg]
            assert len(tree.explored) == tree.creation_counter + 1
            assert all(tree.explored.get(n.config) is n for n in tree.open)
        # the swap is impossible, so some generated successor must repeat
        assert tree.expansions > tree.creation_counter

    def test_consumption_order_is_breadth_first(self):
        inst = Instance.from_configs(corridor(3), [(0, 0), (2, 0)], [(2, 0), (0, 0)])
        tree = SearchTree(inst, record=True)
        assert run_to_end(tree) is Outcome.EXHAUSTED
        root = inst.start_config
        depths = [len(c) for cfg, c in tree.history if cfg == root]
        first_agent = tree.explored[root].order[0]
        n_first = len(inst.map.neighbors(root[first_agent]))
        assert depths[: 1 + n_first] == [0] + [1] * n_first
        assert depths == sorted(depths)


class TestExhaustion:
    @pytest.mark.parametrize(
        "rows,starts,goals",
        [
            (["..."], [(0, 0), (2, 0)], [(2, 0), (0, 0)]),
            (["..", "@."], [(0, 0), (1, 1)], [(1, 1), (0, 0)]),
            ([".."], [(0, 0), (1, 0)], [(1, 0), (0, 0)]),
        ],
    )
    def test_every_constraint_consumed(self, rows, starts, goals):
        inst = Instance.from_configs(GridMap.from_rows(rows), starts, goals)
        tree = SearchTree(inst, record=True)
        assert run_to_end(tree) is Outcome.EXHAUSTED
        assert joint_bfs_oracle(inst).status == "unsolvable"
        calls: dict = {}
        for cfg, _ in tree.history:
            calls[cfg] = calls.get(cfg, 0) + 1
        assert set(calls) == set(tree.explored)
        for cfg, node in tree.explored.items():
            assert calls[cfg] == constraint_tree_size(inst.map, cfg, node.order)
        tree.check_tree()

    def test_unsolvable_corridor_swap(self):
        inst = Instance.from_configs(corridor(2), [(0, 0), (1, 0)], [(1, 0), (0, 0)])
        res = solve_full_horizon(inst)
        assert res.outcome == "unsolvable" and res.path == []

    def test_unreachable_goal(self):
        inst = Instance.from_configs(GridMap.from_rows([".@."]), [(0, 0)], [(2, 0)])
        with pytest.raises(UnsolvableError):
            SearchTree(inst)
        assert solve_full_horizon(inst).outcome == "unsolvable"


class TestSolve:
    def test_bulge_swap_against_oracle(self):
        inst = bulge_swap(6)
        res = solve_full_horizon(inst)
        report = validate(inst, res.path)
        assert res.success and report.valid
        assert report.cost >= joint_bfs_oracle(inst).cost

    def test_random_8x8(self):
        inst = random_instance(np.random.default_rng(8), 8, 8, 4, 0.1)
        res = solve_full_horizon(inst)
        report = validate(inst, res.path)
        assert res.success and report.valid
        assert report.cost >= lower_bound(inst)
        assert res.explored == len(res.tree.explored)

    def test_timeout_reported(self):
        inst = random_instance(np.random.default_rng(1), 8, 8, 6, 0.0)
        res = solve_full_horizon(inst, timeout=0.0)
        assert res.outcome in ("timeout", "success")
        if res.outcome == "timeout":
            assert res.path == []

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_complete_on_tiny_instances(self, seed, n):
        inst = random_instance(np.random.default_rng(seed), 3, 3, n, 0.2)
        oracle = joint_bfs_oracle(inst)
        res = solve_full_horizon(inst, timeout=math.inf)
        assert res.success == oracle.solved
        if res.success:
            report = validate(inst, res.path)
            assert report.valid and report.cost >= oracle.cost
        if res.tree is not None:
            res.tree.check_tree()


class TestReroot:
    def _tree(self):
        inst = random_instance(np.random.default_rng(5), 6, 6, 3, 0.1)
        tree = SearchTree(inst)
        for _ in range(30):
            if tree.expand_once() is not Outcome.PROGRESSED:
                break
        return tree

    def test_reroot_and_back(self):
        tree = self._tree()
        old = tree.root
        child = next(n for n in tree.explored.values() if n.parent is old)
        before = tree.snapshot()
        tree.reroot(child.config)
        tree.check_tree()
        assert tree.root is child and old.parent is child
        assert tree.snapshot() == before
        tree.reroot(old.config)
        tree.check_tree()
        assert tree.root is old and child.parent is old

    def test_reroot_requires_adjacent_explored(self):
        tree = self._tree()
        with pytest.raises(ContractError):
            tree.reroot(((0, 0),) * 3)
        far = next(
            (n for n in tree.explored.values()
             if not valid_transition(tree.grid, tree.root.config, n.config)),
            None,
        )
        if far is not None:
            with pytest.raises(ContractError):
                tree.reroot(far.config)

    def test_reroot_to_root_is_noop(self):
        tree = self._tree()
        before = tree.snapshot()
        tree.reroot(tree.root.config)
        assert tree.snapshot() == before
