"""Exhaustive ground truth for small instances.

Every (y, z) combination is enumerated. For fixed open sites the best
coverage over all backhaul assignments is computed exactly: assignments are
reduced to their maximal per-SCBS budget vectors, and each vector is solved as
a maximum flow source -> site -> subarea -> sink.
"""

import bisect
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from app.errors import OracleSizeError
from app.lagrangian import LagrangeState, build_relaxed, relaxed_objective
from app.model import (
    COST_TOLERANCE,
    NONE,
    Deployment,
    ObjectiveVector,
    Problem,
    deployment_cost,
    max_coverage,
)
from app.pareto import ParetoArchive

logger = logging.getLogger(__name__)

DEFAULT_SIZE_GUARD = 2**20
EXHAUSTIVE_COVERAGE_LIMIT = 16


@dataclass
class OracleResult:
    frontier: ParetoArchive
    per_eps: Dict[float, int] = field(default_factory=dict)
    examined: int = 0
    points: List[ObjectiveVector] = field(default_factory=list)


def _check_guard(problem: Problem, size_guard: int) -> int:
    required = 2**problem.n_bs
    if required > size_guard:
        raise OracleSizeError(required, size_guard)
    return required


def combinations(problem: Problem):
    """All (y, z) flag pairs, BAN flags varying slowest."""
    for z in itertools.product((False, True), repeat=problem.n_ban):
        for y in itertools.product((False, True), repeat=problem.n_sc):
            yield tuple(y), tuple(z)


def backhaul_options(y: Sequence[bool], z: Sequence[bool], problem: Problem) -> Dict[Tuple[int, ...], Tuple[int, ...]]:
    """Maximal budget vectors over all valid SCBS -> BAN assignments, each with one assignment reaching it.

    Empty when some open SCBS cannot be connected within the fan-out limit.
    """
    open_sc = [i for i in range(problem.n_sc) if y[i]]
    states: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Tuple[int, ...]] = {
        ((0,) * problem.n_ban, (0,) * problem.n_sc): (NONE,) * problem.n_sc
    }
    for i in open_sc:
        following = {}
        for (load, budgets), assignment in states.items():
            for k in problem.ban_options[i]:
                if not z[k] or load[k] >= problem.nb_max:
                    continue
                new_load = load[:k] + (load[k] + 1,) + load[k + 1 :]
                new_budgets = budgets[:i] + (problem.links.budget(i, k),) + budgets[i + 1 :]
                key = (new_load, new_budgets)
                if key not in following:
                    following[key] = assignment[:i] + (k,) + assignment[i + 1 :]
        states = following
        if not states:
            return {}

    by_budget: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    for (_, budgets), assignment in sorted(states.items()):
        by_budget.setdefault(budgets, assignment)
    maximal = {}
    for budgets, assignment in by_budget.items():
        covered = any(
            other != budgets and all(a <= b for a, b in zip(budgets, other)) for other in by_budget
        )
        if not covered:
            maximal[budgets] = assignment
    return maximal


def exhaustive_coverage(open_bs: Sequence[int], budgets: Dict[int, int], problem: Problem) -> int:
    """Best covered count by trying every subarea -> site assignment; tiny instances only."""
    S = problem.subarea_count
    if S > EXHAUSTIVE_COVERAGE_LIMIT:
        raise ValueError(f"exhaustive coverage supports at most {EXHAUSTIVE_COVERAGE_LIMIT} subareas, got {S}")
    choices = [[NONE] + [bs for bs in open_bs if problem.in_range[bs, j]] for j in range(S)]
    best = 0
    for assignment in itertools.product(*choices):
        loads: Dict[int, int] = {}
        for bs in assignment:
            if bs != NONE:
                loads[bs] = loads.get(bs, 0) + 1
        if all(problem.is_ban(bs) or loads[bs] <= budgets.get(bs, 0) for bs in loads):
            best = max(best, sum(1 for bs in assignment if bs != NONE))
    return best


def best_deployment(y: Sequence[bool], z: Sequence[bool], problem: Problem) -> Optional[Deployment]:
    """Exact coverage optimum for fixed open flags, or None if the open SCBSs cannot all be backhauled."""
    options = backhaul_options(y, z, problem)
    if not options:
        return None
    open_bs = [i for i in range(problem.n_sc) if y[i]] + [problem.ban_bs(k) for k in range(problem.n_ban) if z[k]]
    best: Optional[Tuple[int, Tuple[int, ...], Tuple[int, ...]]] = None
    for budgets, assignment in sorted(options.items()):
        covered, coverage = max_coverage(open_bs, dict(enumerate(budgets)), problem)
        if best is None or covered > best[0]:
            best = (covered, assignment, coverage)
    _, assignment, coverage = best
    return Deployment(y=tuple(y), z=tuple(z), sc_to_ban=assignment, coverage=coverage)


def enumerate_frontier(problem: Problem, size_guard: int = DEFAULT_SIZE_GUARD) -> OracleResult:
    """Exact Pareto frontier of (cost, uncovered) by full enumeration.

    Raises:
        OracleSizeError: 2^(sites) exceeds size_guard.
    """
    _check_guard(problem, size_guard)
    frontier = ParetoArchive()
    points = []
    examined = 0
    for y, z in combinations(problem):
        examined += 1
        deployment = best_deployment(y, z, problem)
        if deployment is None:
            continue
        covered = sum(1 for bs in deployment.coverage if bs != NONE)
        objective = ObjectiveVector(deployment_cost(y, z, problem), problem.subarea_count - covered)
        points.append(objective)
        frontier.insert(objective, deployment)

    per_eps = {objective.cost: objective.uncovered for objective in frontier.vectors()}
    logger.info(f"Oracle examined {examined} combinations; frontier has {len(frontier)} points")
    return OracleResult(frontier=frontier, per_eps=per_eps, examined=examined, points=points)


def exact_eps_optimum(result: OracleResult, cost_cap: float) -> Optional[int]:
    """Smallest uncovered count of any feasible deployment with cost within the cap."""
    return result.frontier.min_uncovered_within(cost_cap)


@dataclass(frozen=True)
class RelaxedTable:
    """Relaxed value of every (y, z) combination for one multiplier vector, cheapest first.

    best[n] is the minimum over the first n + 1 combinations, so any cost cap
    is answered by a bisection.
    """

    costs: Tuple[float, ...]
    best: Tuple[Tuple[float, Deployment], ...]

    def within(self, cost_cap: float) -> Optional[Tuple[float, Deployment]]:
        n = bisect.bisect_right(self.costs, cost_cap + COST_TOLERANCE) - 1
        return self.best[n] if n >= 0 else None


def relaxed_table(problem: Problem, lg: LagrangeState, size_guard: int = DEFAULT_SIZE_GUARD) -> RelaxedTable:
    """Enumerate the relaxed problem once for the multipliers in lg.

    Raises:
        OracleSizeError: 2^(sites) exceeds size_guard.
    """
    _check_guard(problem, size_guard)
    entries = []
    for y, z in combinations(problem):
        deployment = build_relaxed(y, z, problem, lg)
        entries.append((deployment_cost(y, z, problem), relaxed_objective(deployment, problem, lg), deployment))
    entries.sort(key=lambda entry: entry[0])

    costs, best = [], []
    for cost, value, deployment in entries:
        if not best or value < best[-1][0]:
            best.append((value, deployment))
        else:
            best.append(best[-1])
        costs.append(cost)
    return RelaxedTable(costs=tuple(costs), best=tuple(best))


def exact_relaxed_optimum(
    problem: Problem,
    lg: LagrangeState,
    cost_cap: float,
    size_guard: int = DEFAULT_SIZE_GUARD,
) -> Tuple[float, Deployment]:
    """True minimum of the relaxed problem under the cost cap, with an argmin.

    For fixed open flags the relaxed problem separates by SCBS and by subarea,
    so build_relaxed is exact per combination.
    """
    return relaxed_table(problem, lg, size_guard).within(cost_cap)
