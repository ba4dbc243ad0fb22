import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from rtlacam import cli
from rtlacam.bench import (
    CSV_FIELDS,
    RunSpec,
    format_csv,
    random_map,
    run_matrix,
    run_solver,
    success_rate,
    write_random_benchmark,
)
from rtlacam.io import dump_paths, load_instance, load_map, load_paths
from rtlacam.realtime import ExpansionBudget


@pytest.fixture(scope="module")
def bench(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    map_path, scens = write_random_benchmark(
        out, name="tiny", size=10, n_scenarios=2, rows_per_scenario=8, seed=3
    )
    return map_path, scens


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestBenchmarkData:
    def test_random_map_is_connected(self):
        grid = random_map(12, 12, 0.3, np.random.default_rng(0))
        cells = set(grid.free_cells)
        start = next(iter(cells))
        seen, stack = {start}, [start]
        while stack:
            for w in grid.neighbors(stack.pop()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        assert seen == cells

    def test_written_files_load(self, bench):
        map_path, scens = bench
        grid = load_map(map_path)
        assert (grid.width, grid.height) == (10, 10)
        inst = load_instance(map_path, scens[0], 8)
        assert inst.n_agents == 8

    def test_repository_benchmark_is_reproducible(self, tmp_path):
        from pathlib import Path

        data = Path(__file__).resolve().parents[1] / "data"
        if not (data / "random-32-32-20.map").exists():
            pytest.skip("benchmark data not present")
        map_path, scens = write_random_benchmark(tmp_path, seed=20)
        assert map_path.read_text() == (data / map_path.name).read_text()
        assert scens[-1].read_text() == (data / scens[-1].name).read_text()


class TestRunSolver:
    def test_pibt_single_agent_optimal(self, bench):
        inst = load_instance(bench[0], bench[1][0], 1)
        rec = run_solver(inst, "pibt")
        assert rec.outcome == "success" and rec.normalized_cost == 1.0

    def test_rt_matches_full_horizon_expansions(self, bench):
        inst = load_instance(bench[0], bench[1][0], 6)
        full = run_solver(inst, "lacam")
        rt = run_solver(inst, "rt-lacam", ExpansionBudget.count(1))
        assert full.outcome == rt.outcome == "success"
        assert full.expansions == rt.expansions
        assert rt.normalized_cost >= 1.0 and full.normalized_cost >= 1.0
        assert rt.steps >= 1

    def test_spec_validation(self, bench):
        with pytest.raises(ValueError):
            RunSpec(bench[0], bench[1], [4], "rt-lacam")
        with pytest.raises(ValueError):
            RunSpec(bench[0], bench[1], [4], "bogus")
        with pytest.raises(ValueError):
            RunSpec(bench[0], bench[1], [6, 4], "lacam")

    def test_naive_below_rt_on_congested_map(self, tmp_path):
        from rtlacam.io import ScenarioRow, serialize_map, serialize_scenario

        from conftest import bulge_corridor

        grid = bulge_corridor(7, bulge=1)
        map_path = tmp_path / "bulge.map"
        map_path.write_text(serialize_map(grid))
        scen = tmp_path / "bulge.scen"
        rows = [
            ScenarioRow(0, map_path.name, 7, 2, (0, 1), (6, 1), 6.0),
            ScenarioRow(0, map_path.name, 7, 2, (6, 1), (0, 1), 6.0),
        ]
        scen.write_text(serialize_scenario(rows))
        budget = ExpansionBudget.millis(0.01)
        rates = {
            solver: success_rate(
                run_matrix(RunSpec(map_path, [scen], [2], solver, budget, step_limit=300))
            )
            for solver in ("naive-rt-lacam", "rt-lacam")
        }
        assert rates["naive-rt-lacam"] < rates["rt-lacam"] == 1.0

    def test_matrix_outputs(self, bench, tmp_path):
        spec = RunSpec(
            bench[0],
            bench[1],
            [2, 4],
            "lacam",
            csv_path=tmp_path / "out.csv",
            paths_dir=tmp_path / "paths",
        )
        records = run_matrix(spec)
        assert len(records) == 4 and success_rate(records) == 1.0
        table = rows((tmp_path / "out.csv").read_text())
        assert list(table[0]) == list(CSV_FIELDS)
        trace = tmp_path / "paths" / f"{bench[1][0].stem}_4_lacam.txt"
        configs = load_paths(trace)
        assert len(configs[0]) == 4


class TestCli:
    def test_solve_deterministic_csv(self, bench, tmp_path, capsys):
        args = [
            "solve", "--map", str(bench[0]), "--scen", *map(str, bench[1]),
            "--agents", "2,5", "--solver", "rt-lacam", "--budget-expansions", "3",
            "--omit-timing",
        ]
        assert cli.main(args + ["--csv", str(tmp_path / "a.csv")]) == 0
        assert cli.main(args + ["--csv", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        table = rows((tmp_path / "a.csv").read_text())
        assert {r["outcome"] for r in table} == {"success"}
        assert all(r["total_planning_time_s"] == "" for r in table)
        assert cli.main(args) == 0
        assert capsys.readouterr().out == (tmp_path / "a.csv").read_text()

    def test_validate_accepts_solver_output(self, bench, tmp_path, capsys):
        paths = tmp_path / "paths"
        cli.main([
            "solve", "--map", str(bench[0]), "--scen", str(bench[1][0]), "--agents", "4",
            "--solver", "lacam", "--paths", str(paths), "--csv", str(tmp_path / "x.csv"),
        ])
        trace = paths / f"{bench[1][0].stem}_4_lacam.txt"
        code = cli.main([
            "validate", "--map", str(bench[0]), "--scen", str(bench[1][0]),
            "--agents", "4", "--paths", str(trace),
        ])
        out = capsys.readouterr().out
        assert code == 0 and "valid: True" in out

    def test_validate_rejects_swap_and_wrong_end(self, bench, tmp_path, capsys):
        inst = load_instance(bench[0], bench[1][0], 2)
        s0, s1 = inst.start_config
        bad = tmp_path / "bad.txt"
        # agents trade places although not adjacent: moves and swap are invalid
        dump_paths([(s0, s1), (s1, s0)], bad)
        code = cli.main([
            "validate", "--map", str(bench[0]), "--scen", str(bench[1][0]),
            "--agents", "2", "--paths", str(bad),
        ])
        assert code == 1
        stay = tmp_path / "stay.txt"
        dump_paths([(s0, s1)], stay)
        code = cli.main([
            "validate", "--map", str(bench[0]), "--scen", str(bench[1][0]),
            "--agents", "2", "--paths", str(stay),
        ])
        out = capsys.readouterr().out
        assert code == 1 and "endpoint" in out

    def test_oracle(self, bench, capsys):
        code = cli.main([
            "oracle", "--map", str(bench[0]), "--scen", str(bench[1][0]), "--agents", "2",
        ])
        out = capsys.readouterr().out
        assert code == 0 and "status: solved" in out

    def test_bad_input_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.map"
        code = cli.main([
            "oracle", "--map", str(missing), "--scen", str(missing), "--agents", "1",
        ])
        assert code == 2 and "error" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "rtlacam", "solve", "--help"],
            capture_output=True, text=True, check=True,
        )
        assert "concurrency" in proc.stdout
