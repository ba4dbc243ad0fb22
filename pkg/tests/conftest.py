import numpy as np
import pytest

from rtlacam import GridMap, Instance


def corridor(length: int) -> GridMap:
    return GridMap.from_rows(["." * length])


def bulge_corridor(length: int, bulge: int | None = None) -> GridMap:
    """A 1 x ``length`` corridor (row 1) with a single side cell above ``bulge``."""
    bulge = length // 2 if bulge is None else bulge
    top = "".join("." if x == bulge else "@" for x in range(length))
    return GridMap.from_rows([top, "." * length])


def bulge_swap(length: int, bulge: int | None = None) -> Instance:
    """Two agents at opposite corridor ends that must trade places."""
    grid = bulge_corridor(length, bulge)
    left, right = (0, 1), (length - 1, 1)
    return Instance.from_configs(grid, [left, right], [right, left], name=f"bulge-{length}")


def random_instance(
    rng: np.random.Generator,
    width: int,
    height: int,
    n_agents: int,
    obstacle_ratio: float = 0.2,
) -> Instance:
    """Random obstacles and distinct random starts/goals on free cells (may be unsolvable)."""
    while True:
        free = rng.random((height, width)) >= obstacle_ratio
        if free.sum() >= n_agents:
            break
    grid = GridMap.from_array(free)
    cells = grid.free_cells
    starts = rng.choice(len(cells), n_agents, replace=False)
    goals = rng.choice(len(cells), n_agents, replace=False)
    return Instance.from_configs(grid, [cells[i] for i in starts], [cells[i] for i in goals])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
