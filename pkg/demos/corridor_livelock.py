"""
Why the search tree has to persist
==================================

Two agents stand at the ends of a corridor and must trade places.  The only
way past each other is a single side cell next to agent 0's start.
"""

from rtlacam import GridMap, Instance, run_naive_realtime, run_realtime
from rtlacam.metrics import joint_bfs_oracle
from rtlacam.realtime import ExpansionBudget

# row 0 is wall except for the side cell at x = 1; row 1 is the corridor
length = 7
grid = GridMap.from_rows(["@." + "@" * (length - 2), "." * length])
instance = Instance.from_configs(grid, [(0, 1), (length - 1, 1)], [(length - 1, 1), (0, 1)])

# exhaustive joint-space search proves a solution exists
oracle = joint_bfs_oracle(instance, makespan=True)
print(f"optimal cost {oracle.cost}, makespan {oracle.makespan}")

# one node expansion per timestep, tree discarded every step
budget = ExpansionBudget.count(1)
naive = run_naive_realtime(instance, budget, step_limit=200)
print(f"naive replanning: {naive.outcome} after {naive.trace.steps} steps")
print("  last positions:", naive.configs[-4:])

# same budget, one tree kept and rerooted as the agents move
rt = run_realtime(instance, budget)
print(f"persistent tree:  {rt.outcome} after {rt.trace.steps} steps, {rt.expansions} expansions")


def show(config):
    rows = [list(r) for r in ["@." + "@" * (length - 2), "." * length]]
    for agent, (x, y) in enumerate(config):
        rows[y][x] = str(agent)
    return "\n".join("".join(r) for r in rows)


# the waits are the search catching up; the moves are never wasted
for t, config in enumerate(rt.configs):
    print(f"t={t}\n{show(config)}")
