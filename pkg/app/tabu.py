"""Single-level tabu search over joint SCBS/BAN open, close and swap moves."""

import logging
import math
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.errors import InfeasibleStartError
from app.model import COST_TOLERANCE, Deployment, Problem, deployment_cost, retained_violations
from models import TabuLimits

logger = logging.getLogger(__name__)

Key = Tuple[Tuple[bool, ...], Tuple[bool, ...]]
Builder = Callable[[Tuple[bool, ...], Tuple[bool, ...]], Optional[Deployment]]
ValueFn = Callable[[Deployment], float]

SCOPE_ALL = "all"
SCOPE_SC = "sc"
SCOPE_BAN = "ban"


@dataclass(frozen=True)
class Move:
    kind: str
    sites: Tuple[int, ...]


@dataclass(frozen=True)
class Candidate:
    move: Move
    deployment: Deployment


@dataclass
class TabuState:
    current: Deployment
    current_value: float
    best: Deployment
    best_value: float
    tabu_list: Dict[int, int] = field(default_factory=dict)
    iteration: int = 0
    deploy_counts: List[int] = field(default_factory=list)
    stall: int = 0
    diversifications: int = 0

    def is_tabu(self, site: int) -> bool:
        return self.tabu_list.get(site, 0) > self.iteration


@dataclass(frozen=True)
class TabuResult:
    best: Deployment
    value: float
    state: TabuState


def default_tenure(problem: Problem) -> int:
    return 7 + math.ceil(problem.n_bs / 10)


def memoize_builder(builder: Builder) -> Builder:
    cache: Dict[Key, Optional[Deployment]] = {}
    lock = threading.Lock()

    def build(y, z):
        key = (y, z)
        with lock:
            if key in cache:
                return cache[key]
        built = builder(y, z)
        with lock:
            return cache.setdefault(key, built)

    return build


def memoize_value(value_fn: ValueFn) -> ValueFn:
    """Cache values by open flags; safe to share between evaluation threads."""
    cache: Dict[Key, float] = {}
    lock = threading.Lock()

    def value(deployment: Deployment) -> float:
        with lock:
            if deployment.key in cache:
                return cache[deployment.key]
        computed = value_fn(deployment)
        with lock:
            return cache.setdefault(deployment.key, computed)

    return value


def _flags(deployment: Deployment) -> List[bool]:
    return list(deployment.y) + list(deployment.z)


def _split(flags: Sequence[bool], problem: Problem) -> Key:
    return tuple(flags[: problem.n_sc]), tuple(flags[problem.n_sc :])


def flipped_sites(before: Deployment, after: Deployment) -> List[int]:
    return [b for b, (x, y) in enumerate(zip(_flags(before), _flags(after))) if x != y]


def moves(
    current: Deployment,
    problem: Problem,
    cost_cap: float,
    builder: Builder,
    rng: random.Random,
    n_swap: int,
    scope: str = SCOPE_ALL,
) -> List[Candidate]:
    """Open, close and same-kind swap neighbours of a deployment, each rebuilt by the builder.

    Opens and swaps must keep the cost within the cap; at most n_swap swaps are
    sampled. Candidates the builder rejects or maps back onto the current
    open flags are dropped.
    """
    flags = _flags(current)
    cost = deployment_cost(current.y, current.z, problem)
    if scope == SCOPE_SC:
        groups = [range(problem.n_sc)]
    elif scope == SCOPE_BAN:
        groups = [range(problem.n_sc, problem.n_bs)]
    else:
        groups = [range(problem.n_sc), range(problem.n_sc, problem.n_bs)]

    proposals: List[Tuple[Move, List[bool]]] = []
    swaps: List[Tuple[int, int]] = []
    for group in groups:
        opened = [b for b in group if flags[b]]
        closed = [b for b in group if not flags[b]]
        for b in closed:
            if cost + problem.costs[b] <= cost_cap + COST_TOLERANCE:
                trial = list(flags)
                trial[b] = True
                proposals.append((Move("open", (b,)), trial))
        for b in opened:
            trial = list(flags)
            trial[b] = False
            proposals.append((Move("close", (b,)), trial))
        for out in opened:
            for inn in closed:
                if cost - problem.costs[out] + problem.costs[inn] <= cost_cap + COST_TOLERANCE:
                    swaps.append((out, inn))

    if len(swaps) > n_swap:
        swaps = sorted(rng.sample(swaps, n_swap))
    for out, inn in swaps:
        trial = list(flags)
        trial[out] = False
        trial[inn] = True
        proposals.append((Move("swap", (out, inn)), trial))

    candidates = []
    seen = {current.key}
    for move, trial in proposals:
        built = builder(*_split(trial, problem))
        if built is None or built.key in seen:
            continue
        if deployment_cost(built.y, built.z, problem) > cost_cap + COST_TOLERANCE:
            continue
        seen.add(built.key)
        candidates.append(Candidate(move, built))
    return candidates


def neighborhood(
    state: TabuState,
    problem: Problem,
    cost_cap: float,
    builder: Builder,
    rng: random.Random,
    limits: TabuLimits,
) -> List[Candidate]:
    return moves(state.current, problem, cost_cap, builder, rng, limits.n_swap)


def evaluate_candidates(candidates: Sequence[Candidate], value_fn: ValueFn, workers: int = 1) -> List[float]:
    """Values in candidate order; a thread pool is used when workers > 1.

    Evaluation is pure Python, so threads do not run faster than one worker;
    they exist to check that results do not depend on evaluation order.
    """
    if workers > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: value_fn(c.deployment), candidates))
    return [value_fn(c.deployment) for c in candidates]


def diversify(
    state: TabuState,
    start: Deployment,
    problem: Problem,
    cost_cap: float,
    builder: Builder,
    n_div: int,
) -> Deployment:
    """Open up to n_div affordable sites with the lowest deploy counts (ties by index)."""
    current = start
    opened = 0
    flags = _flags(current)
    for b in sorted((b for b in range(problem.n_bs) if not flags[b]), key=lambda b: (state.deploy_counts[b], b)):
        if opened >= n_div:
            break
        trial = _flags(current)
        if trial[b]:
            continue
        trial[b] = True
        built = builder(*_split(trial, problem))
        if built is None or not _flags(built)[b]:
            continue
        if deployment_cost(built.y, built.z, problem) > cost_cap + COST_TOLERANCE:
            continue
        current = built
        opened += 1
    return current


def tabu_step(
    state: TabuState,
    problem: Problem,
    value_fn: ValueFn,
    builder: Builder,
    cost_cap: float,
    limits: TabuLimits,
    rng: random.Random,
    tenure: int,
    workers: int = 1,
    on_visit: Optional[Callable[[Deployment], None]] = None,
) -> TabuState:
    """One iteration: aspiration, best non-tabu move, diversification, tabu bookkeeping."""
    candidates = neighborhood(state, problem, cost_cap, builder, rng, limits)
    values = evaluate_candidates(candidates, value_fn, workers)
    if on_visit is not None:
        for candidate in candidates:
            on_visit(candidate.deployment)

    previous = state.current
    chosen: Optional[Deployment] = None
    chosen_value = math.inf
    force_diversify = False

    if candidates:
        best_index = min(range(len(candidates)), key=lambda n: (values[n], n))
        if values[best_index] < state.best_value:
            chosen, chosen_value = candidates[best_index].deployment, values[best_index]
            state.best, state.best_value = chosen, chosen_value
            state.stall = 0
        else:
            allowed = [
                n for n, candidate in enumerate(candidates)
                if not any(state.is_tabu(b) for b in flipped_sites(previous, candidate.deployment))
            ]
            if allowed:
                n = min(allowed, key=lambda n: (values[n], n))
                chosen, chosen_value = candidates[n].deployment, values[n]
            else:
                force_diversify = True
            state.stall += 1
    else:
        force_diversify = True
        state.stall += 1

    if force_diversify or state.stall >= limits.t_div:
        base = chosen if chosen is not None else previous
        chosen = diversify(state, base, problem, cost_cap, builder, limits.n_div)
        chosen_value = value_fn(chosen)
        state.diversifications += 1
        state.stall = 0
        if on_visit is not None:
            on_visit(chosen)
        if chosen_value < state.best_value:
            state.best, state.best_value = chosen, chosen_value
        logger.debug(f"Tabu iteration {state.iteration}: diversified to value {chosen_value}")

    state.iteration += 1
    for b in flipped_sites(previous, chosen):
        state.tabu_list[b] = state.iteration + tenure
    state.current, state.current_value = chosen, chosen_value
    for b, is_open in enumerate(_flags(chosen)):
        if is_open:
            state.deploy_counts[b] += 1
    return state


def run_tabu(
    initial: Deployment,
    problem: Problem,
    value_fn: ValueFn,
    builder: Builder,
    cost_cap: float,
    limits: TabuLimits,
    rng: random.Random,
    deploy_counts: Optional[List[int]] = None,
    workers: int = 1,
    on_visit: Optional[Callable[[Deployment], None]] = None,
) -> TabuResult:
    """Run at most N_max tabu steps from a feasible start and return the best deployment found.

    Raises:
        InfeasibleStartError: the start has the wrong size, exceeds the cost cap or
            breaks a constraint that relaxations keep.
    """
    broken = retained_violations(initial, problem, cost_cap)
    if broken:
        raise InfeasibleStartError(f"initial deployment violates constraints {broken}")

    tenure = limits.tenure if limits.tenure is not None else default_tenure(problem)
    start_value = value_fn(initial)
    state = TabuState(
        current=initial,
        current_value=start_value,
        best=initial,
        best_value=start_value,
        deploy_counts=list(deploy_counts) if deploy_counts is not None else [0] * problem.n_bs,
    )
    if on_visit is not None:
        on_visit(initial)
    for _ in range(limits.n_max):
        tabu_step(state, problem, value_fn, builder, cost_cap, limits, rng, tenure, workers, on_visit)
    logger.debug(
        f"Tabu search finished after {state.iteration} iterations: best {state.best_value}, "
        f"{state.diversifications} diversifications"
    )
    return TabuResult(best=state.best, value=state.best_value, state=state)
