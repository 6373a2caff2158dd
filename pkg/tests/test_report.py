"""Tests for report directories and plot data."""
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import json

import pandas as pd
import pytest

from app.errors import ReportError
from app.instance import load_instance
from app.model import complete_deployment, empty_deployment, evaluate, prepare
from app.oracle import enumerate_frontier
from app.pareto import ParetoArchive
from app.report import (
    FRONTIER_COLUMNS,
    covered_fraction,
    plot_data,
    read_frontier,
    read_manifest,
    series_label,
    solution_file,
    write_report,
)
from models import RunManifest, SolverConfig

GOLDEN = os.path.join(os.path.dirname(__file__), "..", "docs", "golden")


def archive_of(problem, *deployments):
    archive = ParetoArchive()
    for deployment in deployments:
        archive.insert(evaluate(deployment, problem), deployment)
    return archive


def manifest(**fields):
    return RunManifest(instance_sha256="0" * 64, seed=0, tool_version="test", **fields)


def test_covered_fraction():
    assert covered_fraction(4, 16) == 0.75
    assert covered_fraction(0, 0) == 1.0


def test_solution_file_lists_ids(grid):
    solution = solution_file(complete_deployment((True, False, True, False), (True,), grid), grid)
    assert solution.cost == 12.0
    assert solution.uncovered == 6
    assert solution.open_sc == ["SC001", "SC003"]
    assert solution.open_ban == ["BAN01"]
    assert {(b.sc_id, b.ban_id) for b in solution.backhaul} == {("SC001", "BAN01"), ("SC003", "BAN01")}
    assert len(solution.coverage) == 10
    assert {c.site_id for c in solution.coverage if c.subarea == 0} == {"BAN01"}


def test_write_report_layout(tmp_path, grid):
    archive = archive_of(grid, empty_deployment(grid), complete_deployment((True, False, True, False), (True,), grid))
    write_report(tmp_path / "run", archive, grid, manifest(method="proposed"), SolverConfig(seed=3))
    frontier = read_frontier(tmp_path / "run")
    assert list(frontier.columns) == FRONTIER_COLUMNS
    assert frontier["solution_file"].tolist() == ["solutions/solution_000.json", "solutions/solution_001.json"]
    second = json.loads((tmp_path / "run" / "solutions" / "solution_001.json").read_text())
    assert second["cost"] == 12.0
    assert read_manifest(tmp_path / "run").method == "proposed"
    assert pd.read_csv(tmp_path / "run" / "bounds.csv").empty
    assert "seed: 3" in (tmp_path / "run" / "config.yml").read_text()


def test_report_without_config_has_no_echo(tmp_path, grid):
    write_report(tmp_path / "run", archive_of(grid, empty_deployment(grid)), grid, manifest())
    assert not (tmp_path / "run" / "config.yml").exists()


def test_missing_and_malformed_manifest(tmp_path):
    with pytest.raises(ReportError):
        read_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(ReportError):
        read_manifest(tmp_path)
    assert series_label(tmp_path) == tmp_path.name


def test_frontier_missing_columns(tmp_path):
    (tmp_path / "frontier.csv").write_text("cost,uncovered\n0,16\n")
    with pytest.raises(ReportError):
        read_frontier(tmp_path)


def test_plot_data_labels(tmp_path, grid):
    for name, oracle in (("exact", True), ("found", False)):
        write_report(tmp_path / name, archive_of(grid, empty_deployment(grid)), grid, manifest(oracle=oracle))
    frame = plot_data([tmp_path / "exact", tmp_path / "found"])
    assert frame["series"].tolist() == ["oracle", "proposed"]
    assert frame["covered_fraction"].tolist() == [0.0, 0.0]
    with pytest.raises(ReportError):
        plot_data([])
    with pytest.raises(ReportError):
        plot_data([tmp_path / "exact"], labels=["a", "b"])


def test_golden_oracle_frontier(tmp_path):
    problem = prepare(load_instance(os.path.join(GOLDEN, "grid-instance.json")))
    result = enumerate_frontier(problem)
    write_report(tmp_path, result.frontier, problem, manifest(method="oracle", oracle=True))
    golden = pd.read_csv(os.path.join(GOLDEN, "grid-frontier.csv"))
    pd.testing.assert_frame_equal(read_frontier(tmp_path), golden)
    empty = json.loads((tmp_path / "solutions" / "solution_000.json").read_text())
    assert empty == json.loads(open(os.path.join(GOLDEN, "solution-empty.json")).read())


def test_golden_manifest_parses():
    assert read_manifest(GOLDEN).reference_point == [14.0, 16.0]
