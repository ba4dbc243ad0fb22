"""Real-Time LaCAM, LaCAM and PIBT for multi-agent path finding on grids."""

from .core import (
    ACTIONS,
    AgentTask,
    Configuration,
    ContractError,
    GridMap,
    Instance,
    InstanceError,
    MapfError,
    UnsolvableError,
    Vertex,
    neighbors,
    path_cost,
    step_cost,
    valid_transition,
)
from .heuristic import DistanceTable, backward_bfs, distance_tables, reachable
from .io import ParseError, load_instance, load_map, parse_map, parse_scenario
from .lacam import LacamResult, Outcome, SearchTree, backtrack_path, init_tree, solve_full_horizon
from .metrics import OracleResult, SolutionReport, joint_bfs_oracle, normalized_cost, validate
from .pibt import (
    Constraint,
    PolicyTable,
    distance_ranker,
    generate,
    policy_ranker,
    run_pibt,
    update_priorities,
)
from .realtime import ExpansionBudget, RtResult, RtSession, run_naive_realtime, run_realtime

__version__ = "0.1.0"
