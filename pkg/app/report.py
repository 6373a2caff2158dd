"""Report directories: frontier, solutions, bounds, trace, config echo and manifest."""

import json
import logging
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from app.config import write_config
from app.driver import SolverReport
from app.errors import ReportError
from app.instance import instance_sha256
from app.model import NONE, Deployment, Problem, evaluate
from app.pareto import ParetoArchive
from models import BackhaulAssignment, Instance, RunManifest, SolutionFile, SolverConfig, SubareaCoverage
from models.run_manifest import utcnow

logger = logging.getLogger(__name__)

FRONTIER_FILE = "frontier.csv"
BOUNDS_FILE = "bounds.csv"
TRACE_FILE = "trace.csv"
CONFIG_FILE = "config.yml"
MANIFEST_FILE = "manifest.json"
SOLUTIONS_DIR = "solutions"

FRONTIER_COLUMNS = ["cost", "uncovered", "covered_fraction", "solution_file"]
BOUNDS_COLUMNS = ["epsilon", "lower_bound", "bound_kind"]
TRACE_COLUMNS = ["epsilon", "iteration", "lower_bound", "upper_bound", "subgradient_norm"]
PLOTDATA_COLUMNS = ["series", "cost", "covered_fraction"]


def covered_fraction(uncovered: int, subarea_count: int) -> float:
    if subarea_count == 0:
        return 1.0
    return (subarea_count - uncovered) / subarea_count


def solution_file(deployment: Deployment, problem: Problem) -> SolutionFile:
    objective = evaluate(deployment, problem)
    return SolutionFile(
        cost=objective.cost,
        uncovered=objective.uncovered,
        covered_fraction=covered_fraction(objective.uncovered, problem.subarea_count),
        open_sc=[problem.sc_sites[i].id for i in deployment.open_sc()],
        open_ban=[problem.ban_sites[k].id for k in deployment.open_ban()],
        backhaul=[
            BackhaulAssignment(sc_id=problem.sc_sites[i].id, ban_id=problem.ban_sites[k].id)
            for i, k in enumerate(deployment.sc_to_ban)
            if k != NONE
        ],
        coverage=[
            SubareaCoverage(subarea=j, site_id=problem.site_id(bs))
            for j, bs in enumerate(deployment.coverage)
            if bs != NONE
        ],
    )


def frontier_frame(frontier: ParetoArchive, problem: Problem) -> pd.DataFrame:
    rows = [
        {
            "cost": objective.cost,
            "uncovered": objective.uncovered,
            "covered_fraction": covered_fraction(objective.uncovered, problem.subarea_count),
            "solution_file": f"{SOLUTIONS_DIR}/solution_{n:03d}.json",
        }
        for n, objective in enumerate(frontier.vectors())
    ]
    return pd.DataFrame(rows, columns=FRONTIER_COLUMNS)


def write_report(
    directory,
    frontier: ParetoArchive,
    problem: Problem,
    manifest: RunManifest,
    config: Optional[SolverConfig] = None,
    bounds: Sequence = (),
    traces: Sequence = (),
) -> Path:
    """Write a report directory and return its path.

    bounds holds records with epsilon, lower_bound and kind; traces holds
    records with epsilon, iteration, lower_bound, upper_bound and
    subgradient_norm.

    Raises:
        ReportError: the directory cannot be written.
    """
    target = Path(directory)
    try:
        (target / SOLUTIONS_DIR).mkdir(parents=True, exist_ok=True)
        frame = frontier_frame(frontier, problem)
        frame.to_csv(target / FRONTIER_FILE, index=False)
        for path, deployment in zip(frame["solution_file"], frontier.deployments()):
            (target / path).write_text(solution_file(deployment, problem).model_dump_json(indent=2) + "\n")

        pd.DataFrame(
            [{"epsilon": b.epsilon, "lower_bound": b.lower_bound, "bound_kind": b.kind} for b in bounds],
            columns=BOUNDS_COLUMNS,
        ).to_csv(target / BOUNDS_FILE, index=False)
        pd.DataFrame(
            [
                {
                    "epsilon": t.epsilon,
                    "iteration": t.iteration,
                    "lower_bound": t.lower_bound,
                    "upper_bound": t.upper_bound,
                    "subgradient_norm": t.subgradient_norm,
                }
                for t in traces
            ],
            columns=TRACE_COLUMNS,
        ).to_csv(target / TRACE_FILE, index=False)

        if config is not None and not write_config({"solver": config.model_dump(mode="json")}, str(target / CONFIG_FILE)):
            raise ReportError(f"Could not write config echo into {target}")
        (target / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2) + "\n")
    except OSError as e:
        raise ReportError(f"Could not write report {target}: {e}") from e
    logger.info(f"Wrote report with {len(frontier)} frontier points to {target}")
    return target


def tool_version() -> str:
    try:
        return version("mmwave-planner")
    except PackageNotFoundError:
        return "0.1.0"


def write_solver_report(
    directory,
    report: SolverReport,
    instance: Instance,
    command: Sequence[str] = (),
    instance_path: Optional[str] = None,
    started_at: Optional[datetime] = None,
) -> RunManifest:
    """Write the report directory of a finished driver run and return its manifest."""
    manifest = RunManifest(
        command=list(command),
        config=report.config.model_dump(mode="json"),
        instance_path=instance_path,
        instance_sha256=instance_sha256(instance),
        seed=report.config.seed,
        method=report.method,
        tool_version=tool_version(),
        finished_at=utcnow(),
        wall_time_s=report.wall_time_s,
        frontier_size=len(report.frontier),
        hypervolume=report.hypervolume(),
        reference_point=list(report.reference_point),
    )
    if started_at is not None:
        manifest.started_at = started_at
    write_report(
        directory, report.frontier, report.problem, manifest, report.config, report.lower_bounds, report.traces
    )
    return manifest


def read_manifest(directory) -> RunManifest:
    path = Path(directory) / MANIFEST_FILE
    try:
        return RunManifest.model_validate(json.loads(path.read_text()))
    except FileNotFoundError as e:
        raise ReportError(f"Report {directory} has no {MANIFEST_FILE}") from e
    except (json.JSONDecodeError, ValidationError) as e:
        raise ReportError(f"Manifest in {directory} is malformed: {e}") from e


def read_frontier(directory) -> pd.DataFrame:
    path = Path(directory) / FRONTIER_FILE
    if not path.is_file():
        raise ReportError(f"Report {directory} has no {FRONTIER_FILE}")
    frame = pd.read_csv(path)
    missing = [column for column in FRONTIER_COLUMNS if column not in frame.columns]
    if missing:
        raise ReportError(f"{path} lacks columns {missing}")
    return frame


def series_label(directory) -> str:
    """Method name from the manifest, else the directory name."""
    try:
        manifest = read_manifest(directory)
        return "oracle" if manifest.oracle else manifest.method
    except ReportError:
        logger.warning(f"No readable manifest in {directory}; labelling by directory name")
        return Path(directory).name


def plot_data(directories: Sequence, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Long-format (series, cost, covered_fraction) rows of several reports.

    Raises:
        ReportError: no reports given, label count mismatch or a missing frontier.
    """
    if not directories:
        raise ReportError("at least one report directory is required")
    if labels and len(labels) != len(directories):
        raise ReportError(f"{len(labels)} labels for {len(directories)} reports")
    frames: List[pd.DataFrame] = []
    for n, directory in enumerate(directories):
        frame = read_frontier(directory)
        label = labels[n] if labels else series_label(directory)
        frames.append(pd.DataFrame({"series": label, "cost": frame["cost"], "covered_fraction": frame["covered_fraction"]}))
    return pd.concat(frames, ignore_index=True)[PLOTDATA_COLUMNS]


def write_plot_data(directories: Iterable, output, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
    frame = plot_data(list(directories), labels)
    frame.to_csv(output, index=False)
    logger.info(f"Wrote {len(frame)} plot rows to {output}")
    return frame
