import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtlacam import GridMap, Instance, InstanceError, neighbors, step_cost, valid_transition

from conftest import corridor


EMPTY3 = GridMap.from_rows(["..."] * 3)


class TestNeighbors:
    def test_interior_has_all_five_actions(self):
        assert neighbors(EMPTY3, (1, 1)) == [(1, 1), (1, 0), (2, 1), (1, 2), (0, 1)]

    def test_corner(self):
        assert neighbors(EMPTY3, (0, 0)) == [(0, 0), (1, 0), (0, 1)]

    def test_blocked_cell_removed(self):
        grid = GridMap.from_rows([".@.", "...", "..."])
        out = neighbors(grid, (1, 1))
        assert (1, 0) not in out
        assert len(out) == 4


class TestValidTransition:
    def test_vertex_collision(self):
        grid = corridor(3)
        assert not valid_transition(grid, ((0, 0), (2, 0)), ((1, 0), (1, 0)))

    def test_edge_swap(self):
        grid = corridor(3)
        assert not valid_transition(grid, ((0, 0), (1, 0)), ((1, 0), (0, 0)))

    def test_one_moves_one_waits(self):
        grid = corridor(3)
        assert valid_transition(grid, ((0, 0), (2, 0)), ((1, 0), (2, 0)))

    def test_following_is_allowed(self):
        grid = corridor(3)
        assert valid_transition(grid, ((0, 0), (1, 0)), ((1, 0), (2, 0)))

    def test_jump_and_blocked_target(self):
        grid = GridMap.from_rows([".@."])
        assert not valid_transition(grid, ((0, 0),), ((2, 0),))
        assert not valid_transition(grid, ((0, 0),), ((1, 0),))

    def test_length_mismatch(self):
        assert not valid_transition(EMPTY3, ((0, 0),), ((0, 0), (1, 1)))


class TestStepCost:
    goals = ((0, 0), (2, 0), (2, 2))

    def test_all_waiting_at_goal_is_free(self):
        assert step_cost(self.goals, self.goals, self.goals) == 0

    def test_off_goal_waits_cost_one(self):
        src = ((1, 1), (1, 2))
        assert step_cost(((0, 0), (2, 0)), src, src) == 2

    def test_mixed(self):
        src = ((0, 1), (1, 0), (2, 2))
        dst = ((0, 0), (1, 0), (2, 2))
        assert step_cost(self.goals, src, dst) == 2

    def test_leaving_goal_costs(self):
        assert step_cost(((0, 0),), ((0, 0),), ((1, 0),)) == 1


class TestInstance:
    def test_rejects_duplicate_goals(self):
        with pytest.raises(InstanceError, match="goal"):
            Instance.from_configs(EMPTY3, [(0, 0), (1, 1)], [(2, 2), (2, 2)])

    def test_rejects_duplicate_starts(self):
        with pytest.raises(InstanceError, match="start"):
            Instance.from_configs(EMPTY3, [(0, 0), (0, 0)], [(2, 2), (1, 2)])

    def test_rejects_blocked_start(self):
        grid = GridMap.from_rows([".@"])
        with pytest.raises(InstanceError, match="agent 0"):
            Instance.from_configs(grid, [(1, 0)], [(0, 0)])

    def test_configs(self):
        inst = Instance.from_configs(EMPTY3, [(0, 0), (1, 1)], [(2, 2), (0, 2)])
        assert inst.start_config == ((0, 0), (1, 1))
        assert inst.goal_config == ((2, 2), (0, 2))
        assert inst.n_agents == 2

    def test_gridmap_validates_size(self):
        with pytest.raises(ValueError):
            GridMap(2, 2, (True,) * 3)


@st.composite
def small_grids(draw):
    w = draw(st.integers(1, 4))
    h = draw(st.integers(1, 3))
    cells = draw(st.lists(st.booleans(), min_size=w * h, max_size=w * h))
    return GridMap(w, h, tuple(cells))


@given(small_grids())
def test_neighbor_relation_symmetric_and_contains_self(grid):
    for v in grid.free_cells:
        out = neighbors(grid, v)
        assert out[0] == v
        assert len(set(out)) == len(out)
        assert 1 <= len(out) <= 5
        for u in out:
            assert v in neighbors(grid, u)


@settings(max_examples=60)
@given(small_grids(), st.data())
def test_valid_transition_is_bidirectional(grid, data):
    free = grid.free_cells
    n = data.draw(st.integers(1, min(3, len(free)))) if free else 0
    if n == 0:
        return
    a = tuple(data.draw(st.permutations(free))[:n])
    b = tuple(data.draw(st.permutations(free))[:n])
    assert valid_transition(grid, a, b) == valid_transition(grid, b, a)
    # exhaustive over all successors of a, too
    for nxt in itertools.product(*(neighbors(grid, v) for v in a)):
        assert valid_transition(grid, a, nxt) == valid_transition(grid, nxt, a)


@given(
    st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=4, unique=True),
    st.data(),
)
def test_step_cost_zero_iff_all_stay_at_goal(goals, data):
    goals = tuple(goals)
    src = tuple(data.draw(st.permutations([(x, y) for x in range(3) for y in range(3)]))[: len(goals)])
    cost = step_cost(goals, src, src)
    assert cost >= 0
    assert (cost == 0) == (src == goals)
