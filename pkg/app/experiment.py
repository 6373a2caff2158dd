"""Sweeps over generated instances: coverage trends and the proposed vs single-tabu comparison.

Each case is one generated instance (SCBS candidate count, N_b, seed). Every
method solves it into its own report directory, and the case's frontiers are
merged into one plot-data file. Summaries are written at the sweep root.
"""

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from app.driver import METHOD_PROPOSED, METHOD_SINGLE_TABU, RUNNERS
from app.errors import ConfigError, ReportError
from app.instance import generate_instance, save_instance
from app.model import prepare
from app.report import covered_fraction, write_plot_data, write_solver_report
from models import AreaSpec, InstanceDefaults, SolverConfig

logger = logging.getLogger(__name__)

DEFAULT_SC_COUNTS = (10, 30, 50, 70)
DEFAULT_NB_VALUES = (2, 3, 4)
DEFAULT_SEED_COUNT = 10
DEFAULT_BAN_COUNT = 6
DEFAULT_AREA_M = 400.0

CASES_DIR = "cases"
INSTANCE_FILE = "instance.json"
PLOTDATA_FILE = "plotdata.csv"
RUNS_FILE = "runs.csv"
COVERAGE_FILE = "coverage.csv"
HYPERVOLUME_FILE = "hypervolume.csv"

RUN_COLUMNS = [
    "n_sc", "nb_max", "seed", "method", "frontier_size", "hypervolume",
    "max_covered_fraction", "wall_time_s", "report",
]
COVERAGE_COLUMNS = ["method", "n_sc", "nb_max", "mean_covered_fraction", "runs"]
HYPERVOLUME_COLUMNS = ["n_sc", "nb_max", "proposed", "single_tabu", "proposed_wins", "instances"]


@dataclass(frozen=True)
class ExperimentPlan:
    area: AreaSpec
    sc_counts: Tuple[int, ...] = DEFAULT_SC_COUNTS
    nb_values: Tuple[int, ...] = DEFAULT_NB_VALUES
    seeds: Tuple[int, ...] = tuple(range(DEFAULT_SEED_COUNT))
    n_ban: int = DEFAULT_BAN_COUNT
    methods: Tuple[str, ...] = (METHOD_PROPOSED, METHOD_SINGLE_TABU)

    def cases(self) -> List[Tuple[int, int, int]]:
        return list(itertools.product(self.sc_counts, self.nb_values, self.seeds))


@dataclass
class ExperimentResult:
    runs: pd.DataFrame
    coverage: pd.DataFrame
    hypervolume: pd.DataFrame


def case_name(n_sc: int, nb_max: int, seed: int) -> str:
    return f"sc{n_sc:03d}-nb{nb_max}-seed{seed:02d}"


def check_plan(plan: ExperimentPlan) -> ExperimentPlan:
    """Raises ConfigError for an empty sweep, a bad count or an unknown method."""
    if not plan.sc_counts or not plan.nb_values or not plan.seeds or not plan.methods:
        raise ConfigError("experiment needs at least one SCBS count, N_b value, seed and method")
    if any(n < 0 for n in plan.sc_counts) or plan.n_ban < 0:
        raise ConfigError("candidate counts must be nonnegative")
    if any(nb < 1 for nb in plan.nb_values):
        raise ConfigError(f"N_b values must be at least 1, got {list(plan.nb_values)}")
    unknown = [m for m in plan.methods if m not in RUNNERS]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; choose from {sorted(RUNNERS)}")
    return plan


def run_case(
    plan: ExperimentPlan,
    n_sc: int,
    nb_max: int,
    seed: int,
    output,
    config: SolverConfig,
    defaults: InstanceDefaults,
    command: Sequence[str] = (),
) -> List[Dict]:
    """Generate one instance, solve it with every method and merge the frontiers for plotting."""
    directory = Path(output) / CASES_DIR / case_name(n_sc, nb_max, seed)
    directory.mkdir(parents=True, exist_ok=True)
    instance = generate_instance(plan.area, n_sc, plan.n_ban, seed, defaults.model_copy(update={"nb_max": nb_max}))
    instance_path = directory / INSTANCE_FILE
    save_instance(instance, instance_path)
    problem = prepare(instance)
    run_config = config.model_copy(update={"seed": seed})

    rows = []
    for method in plan.methods:
        report = RUNNERS[method](problem, run_config)
        target = directory / method
        manifest = write_solver_report(target, report, instance, command, instance_path=str(instance_path))
        best = min(v.uncovered for v in report.frontier.vectors())
        rows.append(
            {
                "n_sc": n_sc,
                "nb_max": nb_max,
                "seed": seed,
                "method": method,
                "frontier_size": manifest.frontier_size,
                "hypervolume": manifest.hypervolume,
                "max_covered_fraction": covered_fraction(best, problem.subarea_count),
                "wall_time_s": manifest.wall_time_s,
                "report": str(target.relative_to(Path(output))),
            }
        )
    write_plot_data([directory / method for method in plan.methods], directory / PLOTDATA_FILE, list(plan.methods))
    logger.info(
        f"Case {directory.name}: "
        + ", ".join(f"{row['method']} hypervolume {row['hypervolume']:.1f}" for row in rows)
    )
    return rows


def coverage_trends(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean best covered fraction per method, SCBS candidate count and N_b."""
    if runs.empty:
        return pd.DataFrame(columns=COVERAGE_COLUMNS)
    grouped = runs.groupby(["method", "n_sc", "nb_max"], sort=True)["max_covered_fraction"]
    frame = grouped.agg(mean_covered_fraction="mean", runs="count").reset_index()
    return frame[COVERAGE_COLUMNS]


def hypervolume_comparison(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean hypervolume of both methods per (SCBS count, N_b) and the instances where proposed is not worse."""
    methods = set(runs["method"]) if not runs.empty else set()
    if not {METHOD_PROPOSED, METHOD_SINGLE_TABU} <= methods:
        return pd.DataFrame(columns=HYPERVOLUME_COLUMNS)
    table = runs.pivot_table(index=["n_sc", "nb_max", "seed"], columns="method", values="hypervolume").dropna()
    table["win"] = table[METHOD_PROPOSED] >= table[METHOD_SINGLE_TABU] - 1e-9
    grouped = table.groupby(level=["n_sc", "nb_max"], sort=True)
    frame = pd.DataFrame(
        {
            "proposed": grouped[METHOD_PROPOSED].mean(),
            "single_tabu": grouped[METHOD_SINGLE_TABU].mean(),
            "proposed_wins": grouped["win"].sum().astype(int),
            "instances": grouped["win"].count(),
        }
    ).reset_index()
    return frame[HYPERVOLUME_COLUMNS]


def run_experiment(
    plan: ExperimentPlan,
    output,
    config: SolverConfig,
    defaults: Optional[InstanceDefaults] = None,
    command: Sequence[str] = (),
) -> ExperimentResult:
    """Run every case of the plan and write the run table and both summaries under output.

    Raises:
        ConfigError: the plan is invalid; raised before any case runs.
        ReportError: an output file cannot be written.
    """
    check_plan(plan)
    defaults = defaults or InstanceDefaults()
    cases = plan.cases()
    logger.info(f"Experiment: {len(cases)} cases x {len(plan.methods)} methods into {output}")
    rows: List[Dict] = []
    for n, (n_sc, nb_max, seed) in enumerate(cases, start=1):
        logger.info(f"Case {n}/{len(cases)}: {n_sc} SCBS candidates, N_b={nb_max}, seed {seed}")
        rows.extend(run_case(plan, n_sc, nb_max, seed, output, config, defaults, command))

    runs = pd.DataFrame(rows, columns=RUN_COLUMNS)
    result = ExperimentResult(runs=runs, coverage=coverage_trends(runs), hypervolume=hypervolume_comparison(runs))
    root = Path(output)
    try:
        runs.to_csv(root / RUNS_FILE, index=False)
        result.coverage.to_csv(root / COVERAGE_FILE, index=False)
        result.hypervolume.to_csv(root / HYPERVOLUME_FILE, index=False)
    except OSError as e:
        raise ReportError(f"Could not write experiment summaries into {root}: {e}") from e
    return result
