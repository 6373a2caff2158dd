"""Lagrangian relaxation of the fan-out and coverage-budget constraints.

The relaxed problem drops the BAN fan-out limit and the per-SCBS coverage
budget and prices them with multipliers lambda1 (per BAN) and lambda2 (per
SCBS). Its value for a deployment with coverage x is

    f2 + sum_k lambda1_k (fan_k - N_b) + sum_i lambda2_i (covered_i - N_ki)

which never exceeds f2 on a feasible deployment.
"""

import logging
import math
import random
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.errors import RetainedConstraintError
from app.model import (
    COST_TOLERANCE,
    NONE,
    Deployment,
    Problem,
    assign_backhaul,
    coverage_counts,
    deployment_cost,
    empty_deployment,
    evaluate,
    fan_out,
    retained_violations,
)
from app.tabu import TabuResult, memoize_builder, memoize_value, run_tabu
from models import TabuLimits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LagrangeState:
    lambda1: Tuple[float, ...]
    lambda2: Tuple[float, ...]
    best_lower_bound: Optional[float] = None
    best_upper_bound: Optional[float] = None
    step_scale: float = 2.0
    stall: int = 0
    last_subgradient_norm: float = 0.0
    iteration: int = 0


@dataclass(frozen=True)
class RelaxedSolution:
    deployment: Deployment
    value: float
    search: Optional[TabuResult] = None


def initial_state(problem: Problem, alpha0: float = 2.0) -> LagrangeState:
    return LagrangeState(lambda1=(0.0,) * problem.n_ban, lambda2=(0.0,) * problem.n_sc, step_scale=alpha0)


def reset_bounds(lg: LagrangeState, alpha0: float) -> LagrangeState:
    """Keep the multipliers, forget the bounds and the step schedule."""
    return replace(
        lg,
        best_lower_bound=None,
        best_upper_bound=None,
        step_scale=alpha0,
        stall=0,
        last_subgradient_norm=0.0,
        iteration=0,
    )


def _assigned_budget(deployment: Deployment, problem: Problem, i: int) -> int:
    k = deployment.sc_to_ban[i]
    return problem.links.budget(i, k) if 0 <= k < problem.n_ban else 0


def relaxed_objective(deployment: Deployment, problem: Problem, lg: LagrangeState) -> float:
    """Relaxed value of a deployment using its own backhaul and coverage, without checks."""
    uncovered = evaluate(deployment, problem).uncovered
    counts = coverage_counts(deployment, problem)
    fan = fan_out(deployment, problem)
    terms = [float(uncovered)]
    terms += [lg.lambda1[k] * (fan[k] - problem.nb_max) for k in range(problem.n_ban)]
    terms += [
        lg.lambda2[i] * (counts[i] - _assigned_budget(deployment, problem, i))
        for i in range(problem.n_sc)
        if deployment.y[i] or counts[i]
    ]
    return math.fsum(terms)


def relaxed_value(
    deployment: Deployment, problem: Problem, lg: LagrangeState, cost_cap: Optional[float] = None
) -> float:
    """Relaxed value after checking the constraints the relaxation keeps.

    Raises:
        RetainedConstraintError: a kept constraint is violated or an assigned
            SCBS -> BAN pair has no backhaul link.
    """
    broken = retained_violations(deployment, problem, cost_cap)
    if broken:
        raise RetainedConstraintError(f"deployment violates kept constraints {broken}", broken)
    return relaxed_objective(deployment, problem, lg)


def m_scores(deployment: Deployment, problem: Problem, lg: LagrangeState) -> List[float]:
    """Per-SCBS contribution m_i to the relaxed objective (larger is more useful)."""
    counts = coverage_counts(deployment, problem)
    scores = []
    for i in range(problem.n_sc):
        k = deployment.sc_to_ban[i]
        score = (1.0 - lg.lambda2[i]) * counts[i]
        if 0 <= k < problem.n_ban:
            score -= lg.lambda1[k] - lg.lambda2[i] * problem.links.budget(i, k)
        scores.append(score)
    return scores


def build_relaxed(y: Sequence[bool], z: Sequence[bool], problem: Problem, lg: LagrangeState) -> Deployment:
    """Best backhaul and coverage of the relaxed problem for fixed open flags.

    SCBSs with no open in-range BAN close. Each remaining SCBS picks the BAN
    minimising lambda1_k - lambda2_i N_ki, and each subarea goes to the open
    in-range site with the largest positive gain (1 for a BAN, 1 - lambda2_i
    for an SCBS), BANs first on ties.
    """
    y = [bool(v) for v in y]
    z = tuple(bool(v) for v in z)
    sc_to_ban = [NONE] * problem.n_sc
    for i in range(problem.n_sc):
        if not y[i]:
            continue
        options = [k for k in problem.ban_options[i] if z[k]]
        if not options:
            y[i] = False
            continue
        sc_to_ban[i] = min(options, key=lambda k: (lg.lambda1[k] - lg.lambda2[i] * problem.links.budget(i, k), k))

    coverage = np.full(problem.subarea_count, NONE, dtype=int)
    if problem.n_bs and problem.subarea_count:
        gains = np.full(problem.n_bs, -np.inf)
        for i in range(problem.n_sc):
            if y[i]:
                gains[i] = 1.0 - lg.lambda2[i]
        for k in range(problem.n_ban):
            if z[k]:
                gains[problem.ban_bs(k)] = 1.0
        order = np.r_[np.arange(problem.n_sc, problem.n_bs), np.arange(problem.n_sc)]
        weighted = np.where(problem.in_range[order], gains[order][:, None], -np.inf)
        pick = weighted.argmax(axis=0)
        best = weighted[pick, np.arange(problem.subarea_count)]
        coverage = np.where(best > 0, order[pick], NONE)
    return Deployment(
        y=tuple(y),
        z=z,
        sc_to_ban=tuple(sc_to_ban),
        coverage=tuple(int(bs) for bs in coverage),
    )


def solve_relaxed(
    problem: Problem,
    lg: LagrangeState,
    cost_cap: float,
    rng: random.Random,
    limits: TabuLimits,
    initial: Optional[Deployment] = None,
    deploy_counts: Optional[List[int]] = None,
    workers: int = 1,
) -> RelaxedSolution:
    """Tabu search on the relaxed problem; the value is an upper bound on its optimum."""
    start = empty_deployment(problem)
    if initial is not None and deployment_cost(initial.y, initial.z, problem) <= cost_cap + COST_TOLERANCE:
        start = initial
    start = build_relaxed(start.y, start.z, problem, lg)

    builder = memoize_builder(lambda y, z: build_relaxed(y, z, problem, lg))
    value_fn = memoize_value(lambda deployment: relaxed_objective(deployment, problem, lg))
    result = run_tabu(
        start,
        problem,
        value_fn,
        builder,
        cost_cap,
        limits,
        rng,
        deploy_counts=deploy_counts,
        workers=workers,
    )
    return RelaxedSolution(deployment=result.best, value=result.value, search=result)


def subgradients(deployment: Deployment, problem: Problem) -> Tuple[List[float], List[float]]:
    fan = fan_out(deployment, problem)
    counts = coverage_counts(deployment, problem)
    g1 = [float(fan[k] - problem.nb_max) for k in range(problem.n_ban)]
    g2 = [float(counts[i] - _assigned_budget(deployment, problem, i)) for i in range(problem.n_sc)]
    return g1, g2


def subgradient_update(
    lg: LagrangeState,
    solution: Deployment,
    problem: Problem,
    lower_bound: Optional[float] = None,
    upper_bound: Optional[float] = None,
    patience: int = 10,
) -> LagrangeState:
    """Projected subgradient step with theta = alpha (UB - LB) / |g|^2.

    alpha halves after `patience` consecutive iterations without a better
    lower bound.
    """
    best_upper = lg.best_upper_bound
    if upper_bound is not None:
        best_upper = upper_bound if best_upper is None else min(best_upper, upper_bound)

    best_lower = lg.best_lower_bound
    improved = False
    if lower_bound is not None and (best_lower is None or lower_bound > best_lower):
        best_lower = lower_bound
        improved = True
    if best_lower is not None and best_upper is not None and best_lower > best_upper:
        logger.warning(f"Lower bound {best_lower} above upper bound {best_upper}; clamping")
        best_lower = best_upper

    stall = 0 if improved else lg.stall + 1
    step_scale = lg.step_scale
    if stall >= patience:
        step_scale /= 2.0
        stall = 0

    g1, g2 = subgradients(solution, problem)
    norm_sq = math.fsum(g * g for g in g1 + g2)
    if best_lower is not None and best_upper is not None:
        gap = max(0.0, best_upper - best_lower)
    else:
        gap = 1.0
    theta = step_scale * gap / norm_sq if norm_sq > 0 else 0.0

    return LagrangeState(
        lambda1=tuple(max(0.0, lam + theta * g) for lam, g in zip(lg.lambda1, g1)),
        lambda2=tuple(max(0.0, lam + theta * g) for lam, g in zip(lg.lambda2, g2)),
        best_lower_bound=best_lower,
        best_upper_bound=best_upper,
        step_scale=step_scale,
        stall=stall,
        last_subgradient_norm=math.sqrt(norm_sq),
        iteration=lg.iteration + 1,
    )


def repair(
    relaxed: Deployment,
    problem: Problem,
    cost_cap: Optional[float] = None,
    lg: Optional[LagrangeState] = None,
) -> Deployment:
    """Turn a relaxed solution into a feasible deployment.

    1. Close SCBSs with the smallest m_i until the open BANs have enough
       fan-out slots, then reconnect every SCBS to a BAN with a free slot.
    2. Trim each SCBS to its N_ki budget, dropping its farthest subareas.
    3. Give each uncovered subarea to the least loaded in-range open site
       that still has budget (ties by index).
    """
    if lg is None:
        lg = LagrangeState(lambda1=(0.0,) * problem.n_ban, lambda2=(0.0,) * problem.n_sc)
    priority = m_scores(relaxed, problem, lg)
    y, sc_to_ban = assign_backhaul(relaxed.y, relaxed.z, problem, priority)
    z = tuple(bool(v) for v in relaxed.z)

    budgets = [problem.links.budget(i, sc_to_ban[i]) if y[i] and sc_to_ban[i] != NONE else 0 for i in range(problem.n_sc)]
    coverage = [NONE] * problem.subarea_count
    kept: List[List[int]] = [[] for _ in range(problem.n_sc)]
    for j, bs in enumerate(relaxed.coverage):
        if bs == NONE or not 0 <= bs < problem.n_bs or not problem.in_range[bs, j]:
            continue
        if problem.is_ban(bs):
            if z[bs - problem.n_sc]:
                coverage[j] = bs
        elif y[bs] and budgets[bs] > 0:
            kept[bs].append(j)
    for i, subareas in enumerate(kept):
        nearest = sorted(subareas, key=lambda j: (problem.distances[i, j], j))[: budgets[i]]
        for j in nearest:
            coverage[j] = i

    load = [0] * problem.n_bs
    for bs in coverage:
        if bs != NONE:
            load[bs] += 1
    open_sites = [i for i in range(problem.n_sc) if y[i] and budgets[i] > 0]
    open_sites += [problem.ban_bs(k) for k in range(problem.n_ban) if z[k]]
    for j in range(problem.subarea_count):
        if coverage[j] != NONE:
            continue
        choices = [
            bs for bs in open_sites
            if problem.in_range[bs, j] and (problem.is_ban(bs) or load[bs] < budgets[bs])
        ]
        if choices:
            bs = min(choices, key=lambda bs: (load[bs], bs))
            coverage[j] = bs
            load[bs] += 1

    repaired = Deployment(y=tuple(y), z=z, sc_to_ban=tuple(sc_to_ban), coverage=tuple(coverage))
    if cost_cap is not None and deployment_cost(repaired.y, repaired.z, problem) > cost_cap + COST_TOLERANCE:
        logger.warning(f"Repaired deployment exceeds cost cap {cost_cap}; relaxed input was over the cap")
    return repaired
