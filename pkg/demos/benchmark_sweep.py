"""
A small benchmark sweep
=======================

The bundled ``data/`` directory holds a seeded 32 x 32 map with 20% obstacles
and 25 scenario files.  This sweep runs three solvers on the first scenarios
with a modest agent count and prints the CSV rows the CLI would write.
"""

from pathlib import Path

from rtlacam.bench import RunSpec, format_csv, run_matrix, success_rate
from rtlacam.realtime import ExpansionBudget

data = Path(__file__).resolve().parents[1] / "data"
scens = [data / f"random-32-32-20-random-{k}.scen" for k in (1, 2, 3)]

records = []
for solver, budget in (("pibt", None), ("lacam", None), ("rt-lacam", ExpansionBudget.count(1))):
    spec = RunSpec(data / "random-32-32-20.map", scens, [20, 40], solver, budget, timeout_s=30, step_limit=2000)
    batch = run_matrix(spec)
    print(f"{solver}: success rate {success_rate(batch):.2f}")
    records += batch

print(format_csv(records))
