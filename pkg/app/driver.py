"""Adaptive epsilon-constraint loop over Lagrangian bounds and two-level tabu search."""

import functools
import logging
import random
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from app.errors import ConfigError
from app.lagrangian import LagrangeState, initial_state, repair, reset_bounds, solve_relaxed, subgradient_update
from app.model import COST_TOLERANCE, Deployment, Problem, complete_deployment, empty_deployment, evaluate, prepare
from app.oracle import relaxed_table
from app.pareto import ParetoArchive, hypervolume, two_level_search
from app.tabu import memoize_builder, memoize_value, run_tabu
from models import Instance, SolverConfig

logger = logging.getLogger(__name__)

METHOD_PROPOSED = "proposed"
METHOD_SINGLE_TABU = "single-tabu"
BOUND_EXACT = "exact"
BOUND_HEURISTIC = "heuristic"
BOUND_CACHE_SIZE = 32


@dataclass(frozen=True)
class BoundRecord:
    epsilon: float
    lower_bound: float
    kind: str


@dataclass(frozen=True)
class TraceRow:
    epsilon: float
    iteration: int
    lower_bound: Optional[float]
    upper_bound: Optional[float]
    subgradient_norm: float


@dataclass
class SolverReport:
    problem: Problem
    config: SolverConfig
    frontier: ParetoArchive
    eps0: float
    delta_c: float
    delta_eps: float
    method: str = METHOD_PROPOSED
    cost_caps: List[float] = field(default_factory=list)
    lower_bounds: List[BoundRecord] = field(default_factory=list)
    traces: List[TraceRow] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def reference_point(self) -> Tuple[float, int]:
        return (self.eps0, self.problem.subarea_count)

    def hypervolume(self) -> float:
        return hypervolume(self.frontier.vectors(), self.reference_point)


def validate_config(config: Optional[SolverConfig]) -> SolverConfig:
    if config is None:
        return SolverConfig()
    try:
        return SolverConfig.model_validate(config.model_dump())
    except ValidationError as e:
        raise ConfigError(f"invalid solver configuration: {e}") from e


def resolve_steps(problem: Problem, config: SolverConfig) -> Tuple[float, float]:
    """Delta_c (default: smallest positive site cost, else 1) and delta_eps (default: 2 x smallest SCBS cost)."""
    delta_c = config.delta_c
    if delta_c is None:
        delta_c = problem.min_site_cost() or 1.0
    delta_eps = config.delta_eps
    if delta_eps is None:
        sc_costs = [c for c in problem.costs[: problem.n_sc] if c > 0]
        delta_eps = 2.0 * min(sc_costs) if sc_costs else delta_c
    return delta_c, delta_eps


def update_epsilon(eps: float, harvested_costs: Sequence[float], delta_c: float) -> float:
    """Next cost cap: min(min harvested cost, eps) - delta_c, or eps - delta_c when nothing was harvested."""
    if delta_c <= 0:
        raise ConfigError(f"delta_c must be positive, got {delta_c}")
    if not harvested_costs:
        return eps - delta_c
    return min(min(harvested_costs), eps) - delta_c


def _window_costs(archive: ParetoArchive, eps: float, delta_eps: float) -> List[float]:
    return [o.cost for o in archive.vectors() if eps - delta_eps - COST_TOLERANCE <= o.cost <= eps + COST_TOLERANCE]


def _as_problem(instance_or_problem: Union[Instance, Problem]) -> Problem:
    if isinstance(instance_or_problem, Problem):
        return instance_or_problem
    return prepare(instance_or_problem)


def _seeded_archive(problem: Problem) -> ParetoArchive:
    archive = ParetoArchive()
    empty = empty_deployment(problem)
    archive.insert(evaluate(empty, problem), empty)
    return archive


def solve(instance_or_problem: Union[Instance, Problem], config: Optional[SolverConfig] = None) -> SolverReport:
    """Sweep the cost cap from the total site cost down to zero.

    Per cap: N_max,L rounds of relaxed tabu solve, lower bound, repair,
    two-level search and multiplier update; the harvest then sets the next cap.

    Raises:
        ConfigError: the configuration is invalid; raised before any search.
    """
    config = validate_config(config)
    started = time.perf_counter()
    problem = _as_problem(instance_or_problem)
    delta_c, delta_eps = resolve_steps(problem, config)
    rng = random.Random(config.seed)
    eps0 = problem.total_cost()
    archive = _seeded_archive(problem)
    report = SolverReport(
        problem=problem, config=config, frontier=archive, eps0=eps0, delta_c=delta_c, delta_eps=delta_eps
    )
    exact_bounds = 2**problem.n_bs <= config.exact_bound_guard
    bound_kind = BOUND_EXACT if exact_bounds else BOUND_HEURISTIC
    logger.info(
        f"Solving {problem.n_sc} SCBS + {problem.n_ban} BAN candidates over {problem.subarea_count} subareas: "
        f"eps0={eps0}, delta_c={delta_c}, delta_eps={delta_eps}, bounds {bound_kind}"
    )

    @functools.lru_cache(maxsize=BOUND_CACHE_SIZE)
    def bound_table(lambda1: Tuple[float, ...], lambda2: Tuple[float, ...]):
        return relaxed_table(problem, LagrangeState(lambda1, lambda2), size_guard=config.exact_bound_guard)

    lg = initial_state(problem, config.alpha0)
    deploy_counts = [0] * problem.n_bs
    eps = eps0
    while True:
        report.cost_caps.append(eps)
        if config.warm_start:
            lg = reset_bounds(lg, config.alpha0)
        else:
            lg = initial_state(problem, config.alpha0)
            deploy_counts = [0] * problem.n_bs
        harvest = ParetoArchive()

        for iteration in range(config.n_max_lagrange):
            _, incumbent = archive.best_within(eps)
            relaxed = solve_relaxed(
                problem, lg, eps, rng, config.tabu,
                initial=incumbent, deploy_counts=deploy_counts, workers=config.workers,
            )
            if config.warm_start:
                deploy_counts = list(relaxed.search.state.deploy_counts)
            if exact_bounds:
                lower, _ = bound_table(lg.lambda1, lg.lambda2).within(eps)
            else:
                lower = relaxed.value

            repaired = repair(relaxed.deployment, problem, eps, lg)
            found = two_level_search(repaired, problem, eps, delta_eps, config.tabu, rng)
            harvest.merge(found)
            archive.merge(found)

            _, source = found.max_cost_entry()
            lg = subgradient_update(
                lg, source, problem,
                lower_bound=lower, upper_bound=archive.min_uncovered_within(eps),
                patience=config.halving_patience,
            )
            report.traces.append(
                TraceRow(eps, iteration, lg.best_lower_bound, lg.best_upper_bound, lg.last_subgradient_norm)
            )

        if lg.best_lower_bound is not None:
            report.lower_bounds.append(BoundRecord(eps, lg.best_lower_bound, bound_kind))
        next_eps = update_epsilon(eps, _window_costs(harvest, eps, delta_eps), delta_c)
        logger.info(
            f"eps={eps}: lower bound {lg.best_lower_bound}, frontier size {len(archive)}, next eps {next_eps}"
        )
        eps = next_eps
        if eps <= 0:
            break

    report.wall_time_s = time.perf_counter() - started
    logger.info(f"Frontier of {len(archive)} points after {len(report.cost_caps)} cost caps")
    return report


def solve_single_level(
    instance_or_problem: Union[Instance, Problem], config: Optional[SolverConfig] = None
) -> SolverReport:
    """Baseline: the same cost-cap sweep, each cap solved by one single-level tabu run on feasible deployments.

    The search minimises uncovered subareas with a cost tie-break and archives
    every feasible deployment it visits.
    """
    config = validate_config(config)
    started = time.perf_counter()
    problem = _as_problem(instance_or_problem)
    delta_c, delta_eps = resolve_steps(problem, config)
    rng = random.Random(config.seed)
    eps0 = problem.total_cost()
    archive = _seeded_archive(problem)
    report = SolverReport(
        problem=problem,
        config=config,
        frontier=archive,
        eps0=eps0,
        delta_c=delta_c,
        delta_eps=delta_eps,
        method=METHOD_SINGLE_TABU,
    )
    builder = memoize_builder(lambda y, z: complete_deployment(y, z, problem))

    def scalar(deployment: Deployment) -> float:
        objective = evaluate(deployment, problem)
        return objective.uncovered + objective.cost / (eps0 + 1.0)

    value_fn = memoize_value(scalar)
    deploy_counts = [0] * problem.n_bs
    eps = eps0
    while True:
        report.cost_caps.append(eps)
        harvest = ParetoArchive()

        def visit(deployment: Deployment) -> None:
            objective = evaluate(deployment, problem)
            archive.insert(objective, deployment)
            harvest.insert(objective, deployment)

        _, incumbent = archive.best_within(eps)
        result = run_tabu(
            incumbent, problem, value_fn, builder, eps, config.tabu, rng,
            deploy_counts=deploy_counts if config.warm_start else None,
            workers=config.workers, on_visit=visit,
        )
        if config.warm_start:
            deploy_counts = list(result.state.deploy_counts)
        next_eps = update_epsilon(eps, _window_costs(harvest, eps, delta_eps), delta_c)
        logger.info(f"eps={eps}: best value {result.value}, frontier size {len(archive)}, next eps {next_eps}")
        eps = next_eps
        if eps <= 0:
            break

    report.wall_time_s = time.perf_counter() - started
    return report


RUNNERS = {METHOD_PROPOSED: solve, METHOD_SINGLE_TABU: solve_single_level}
