"""Tests for the mmwave-planner command line."""
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import json

import pandas as pd
import pytest
import yaml

from app.instance import load_instance, save_instance
from app.main import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from app.report import FRONTIER_FILE, MANIFEST_FILE, read_manifest
from conftest import grid_instance, make_instance, small_limits


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yml"
    solver = {"n_max_lagrange": 2, "tabu": small_limits().model_dump()}
    path.write_text(yaml.safe_dump({"solver": solver}))
    return str(path)


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "grid.json"
    save_instance(grid_instance(), path)
    return str(path)


@pytest.fixture
def empty_file(tmp_path):
    path = tmp_path / "empty.json"
    save_instance(make_instance(width=20.0, height=20.0), path)
    return str(path)


def test_gen_writes_valid_instance(tmp_path, capsys):
    output = tmp_path / "inst.json"
    code = main(["--config", str(tmp_path / "none.yml"), "gen", "--area", "40x30", "--sc", "3", "--ban", "1",
                 "--seed", "5", "-o", str(output)])
    assert code == EXIT_OK
    instance = load_instance(output)
    assert len(instance.sc_sites) == 3
    assert len(instance.ban_sites) == 1
    assert instance.area.subarea_count == 12
    assert "subareas (S): 12" in capsys.readouterr().out


def test_gen_is_deterministic(tmp_path):
    outputs = [tmp_path / "a.json", tmp_path / "b.json"]
    for output in outputs:
        assert main(["gen", "--area", "60x60", "--sc", "6", "--ban", "2", "--seed", "9", "-o", str(output)]) == 0
    assert outputs[0].read_text() == outputs[1].read_text()


@pytest.mark.parametrize("args", [
    ["gen", "--area", "40x40", "--sc", "-1", "--ban", "1", "-o", "x.json"],
    ["gen", "--area", "forty", "--sc", "1", "--ban", "1", "-o", "x.json"],
    ["solve"],
    ["frobnicate"],
])
def test_usage_errors_exit_with_one(args):
    with pytest.raises(SystemExit) as exc_info:
        main(args)
    assert exc_info.value.code == EXIT_USAGE


def test_solve_without_instance_is_usage_error(tmp_path):
    assert main(["solve", "-o", str(tmp_path / "out")]) == EXIT_USAGE


def test_missing_instance_is_validation_error(tmp_path, config_file):
    code = main(["--config", config_file, "solve", str(tmp_path / "absent.json"), "-o", str(tmp_path / "out")])
    assert code == EXIT_VALIDATION


def test_invalid_config_is_validation_error(tmp_path, empty_file):
    bad = tmp_path / "bad.yml"
    bad.write_text(yaml.safe_dump({"solver": {"delta_c": -2}}))
    assert main(["--config", str(bad), "solve", empty_file, "-o", str(tmp_path / "out")]) == EXIT_VALIDATION


def test_solve_empty_instance_passes_oracle_check(tmp_path, config_file, empty_file, capsys):
    output = tmp_path / "out"
    assert main(["--config", config_file, "solve", empty_file, "-o", str(output), "--oracle-check"]) == EXIT_OK
    frontier = pd.read_csv(output / FRONTIER_FILE)
    assert frontier[["cost", "uncovered"]].values.tolist() == [[0.0, 4]]
    assert "Oracle check passed" in capsys.readouterr().out


def test_solve_writes_report_and_manifest(tmp_path, config_file, grid_file):
    output = tmp_path / "out"
    code = main(["--config", config_file, "solve", grid_file, "-o", str(output), "--seed", "4", "--threads", "2"])
    assert code == EXIT_OK
    manifest = read_manifest(output)
    assert manifest.seed == 4
    assert manifest.config["workers"] == 2
    assert manifest.method == "proposed"
    assert manifest.reference_point == [14.0, 16.0]
    frontier = pd.read_csv(output / FRONTIER_FILE)
    assert manifest.frontier_size == len(frontier)
    for path in frontier["solution_file"]:
        solution = json.loads((output / path).read_text())
        assert set(solution["open_ban"]) <= {"BAN01"}
    for name in ("bounds.csv", "trace.csv", "config.yml"):
        assert (output / name).is_file()


def test_replay_reproduces_frontier(tmp_path, config_file, grid_file):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["--config", config_file, "solve", grid_file, "-o", str(first), "--seed", "2"]) == EXIT_OK
    assert main(["solve", "--replay", str(first), "-o", str(second)]) == EXIT_OK
    assert (first / FRONTIER_FILE).read_text() == (second / FRONTIER_FILE).read_text()
    assert read_manifest(second).seed == 2


def test_single_tabu_baseline(tmp_path, config_file, grid_file):
    output = tmp_path / "baseline"
    code = main(["--config", config_file, "solve", grid_file, "-o", str(output), "--baseline", "single-tabu"])
    assert code == EXIT_OK
    assert read_manifest(output).method == "single-tabu"


def test_oracle_command(tmp_path, grid_file):
    output = tmp_path / "oracle"
    assert main(["oracle", grid_file, "-o", str(output)]) == EXIT_OK
    frontier = pd.read_csv(output / FRONTIER_FILE)
    assert frontier[["cost", "uncovered"]].values.tolist() == [[0.0, 16], [10.0, 13], [11.0, 8], [12.0, 6], [13.0, 4]]
    manifest = json.loads((output / MANIFEST_FILE).read_text())
    assert manifest["oracle"] is True


def test_oracle_size_guard(tmp_path, grid_file):
    assert main(["oracle", grid_file, "-o", str(tmp_path / "o"), "--size-guard", "16"]) == EXIT_VALIDATION


def test_plotdata_merges_reports(tmp_path, config_file, grid_file):
    exact, heuristic = tmp_path / "exact", tmp_path / "heuristic"
    assert main(["oracle", grid_file, "-o", str(exact)]) == EXIT_OK
    assert main(["--config", config_file, "solve", grid_file, "-o", str(heuristic)]) == EXIT_OK
    output = tmp_path / "plot.csv"
    assert main(["plotdata", str(exact), str(heuristic), "-o", str(output)]) == EXIT_OK
    frame = pd.read_csv(output)
    assert list(frame.columns) == ["series", "cost", "covered_fraction"]
    assert set(frame["series"]) == {"oracle", "proposed"}
    labelled = tmp_path / "labelled.csv"
    assert main(["plotdata", str(exact), str(heuristic), "--label", "A", "--label", "B", "-o", str(labelled)]) == 0
    assert set(pd.read_csv(labelled)["series"]) == {"A", "B"}


def test_plotdata_errors(tmp_path, grid_file):
    assert main(["plotdata", "-o", str(tmp_path / "p.csv")]) == EXIT_USAGE
    exact = tmp_path / "exact"
    assert main(["oracle", grid_file, "-o", str(exact)]) == EXIT_OK
    assert main(["plotdata", str(exact), "--label", "A", "--label", "B", "-o", str(tmp_path / "p.csv")]) == EXIT_VALIDATION
    assert main(["plotdata", str(tmp_path / "nothing"), "-o", str(tmp_path / "p.csv")]) == EXIT_VALIDATION


def test_schema_command(capsys):
    assert main(["schema"]) == EXIT_OK
    schema = json.loads(capsys.readouterr().out)
    assert "sc_sites" in schema["properties"]
