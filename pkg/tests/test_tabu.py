"""Tests for the single-level tabu search."""
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import itertools
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from app.errors import InfeasibleStartError
from app.model import (
    NONE,
    Deployment,
    check_feasible,
    complete_deployment,
    empty_deployment,
    evaluate,
    prepare,
)
from app.lagrangian import LagrangeState, build_relaxed, relaxed_objective
from app.oracle import exact_relaxed_optimum
from app.tabu import (
    Move,
    TabuState,
    default_tenure,
    memoize_builder,
    memoize_value,
    moves,
    neighborhood,
    run_tabu,
    tabu_step,
)
from conftest import ban, make_instance, oracle_sized_instance, small_limits
from models import TabuLimits


def flags_only(problem):
    """Builder that keeps the proposed flags as they are."""

    def build(y, z):
        return Deployment(y=y, z=z, sc_to_ban=(NONE,) * problem.n_sc, coverage=(NONE,) * problem.subarea_count)

    return build


def open_count(deployment):
    return sum(deployment.y) + sum(deployment.z)


def uncovered(problem):
    return lambda deployment: float(evaluate(deployment, problem).uncovered)


def test_default_tenure(grid):
    assert default_tenure(grid) == 8


def test_all_closed_neighbourhood_is_opens(grid):
    candidates = moves(empty_deployment(grid), grid, 100.0, flags_only(grid), random.Random(0), n_swap=50)
    assert len(candidates) == 5
    assert {c.move.kind for c in candidates} == {"open"}


def test_zero_cap_allows_only_closes(grid):
    build = flags_only(grid)
    assert moves(empty_deployment(grid), grid, 0.0, build, random.Random(0), n_swap=50) == []


def test_opens_respect_cost_cap(grid):
    build = flags_only(grid)
    current = build((True, False, False, False), (True,))
    candidates = moves(current, grid, 11.0, build, random.Random(0), n_swap=50)
    assert sorted(c.move.kind for c in candidates) == ["close", "close", "swap", "swap", "swap"]


def test_swaps_are_sampled_within_kind(grid):
    build = flags_only(grid)
    current = build((True, True, False, False), (True,))
    candidates = moves(current, grid, 100.0, build, random.Random(0), n_swap=50)
    swaps = [c.move.sites for c in candidates if c.move.kind == "swap"]
    assert sorted(swaps) == [(0, 2), (0, 3), (1, 2), (1, 3)]
    limited = moves(current, grid, 100.0, build, random.Random(0), n_swap=2)
    assert sum(1 for c in limited if c.move.kind == "swap") == 2


def test_closing_sole_ban_closes_its_scbs(grid):
    current = complete_deployment((True, True, False, False), (True,), grid)
    candidates = moves(current, grid, 100.0, lambda y, z: complete_deployment(y, z, grid), random.Random(0), 50)
    closed_ban = [c.deployment for c in candidates if c.move == Move("close", (4,))]
    assert len(closed_ban) == 1
    assert closed_ban[0].y == (False,) * 4


def test_tabu_entries_expire():
    state = TabuState(current=None, current_value=0.0, best=None, best_value=0.0, tabu_list={3: 5}, iteration=4)
    assert state.is_tabu(3)
    state.iteration = 5
    assert not state.is_tabu(3)


def test_aspiration_accepts_tabu_improvement(grid):
    start = empty_deployment(grid)
    state = TabuState(
        current=start,
        current_value=0.0,
        best=start,
        best_value=0.0,
        tabu_list={b: 100 for b in range(grid.n_bs)},
        deploy_counts=[0] * grid.n_bs,
    )
    tabu_step(state, grid, lambda d: -float(open_count(d)), flags_only(grid), 100.0, small_limits(), random.Random(0), 8)
    assert open_count(state.current) == 1
    assert state.best_value == -1.0
    assert state.diversifications == 0


def test_all_tabu_triggers_diversification(grid):
    start = empty_deployment(grid)
    state = TabuState(
        current=start,
        current_value=0.0,
        best=start,
        best_value=0.0,
        tabu_list={b: 100 for b in range(grid.n_bs)},
        deploy_counts=[0] * grid.n_bs,
    )
    limits = TabuLimits(n_max=1, t_div=25, n_div=2, n_swap=10)
    tabu_step(state, grid, lambda d: 0.0, flags_only(grid), 100.0, limits, random.Random(0), 8)
    assert state.diversifications == 1
    assert state.current.y == (True, True, False, False)
    assert state.deploy_counts == [1, 1, 0, 0, 0]


def test_zero_iterations_returns_initial(grid):
    start = complete_deployment((False,) * 4, (True,), grid)
    result = run_tabu(start, grid, uncovered(grid), lambda y, z: complete_deployment(y, z, grid), 14.0,
                      TabuLimits(n_max=0), random.Random(0))
    assert result.best == start
    assert result.value == 13.0


def test_infeasible_start_rejected(grid):
    start = complete_deployment((False,) * 4, (True,), grid)
    with pytest.raises(InfeasibleStartError):
        run_tabu(start, grid, uncovered(grid), flags_only(grid), 5.0, small_limits(), random.Random(0))


@pytest.mark.parametrize("start", [
    Deployment(y=(True, False, False, False), z=(True,), sc_to_ban=(NONE,) * 4, coverage=(NONE,) * 16),
    Deployment(y=(False,) * 4, z=(False,), sc_to_ban=(NONE,) * 4, coverage=(4,) + (NONE,) * 15),
    Deployment(y=(False,) * 4, z=(True,), sc_to_ban=(NONE,) * 4, coverage=(NONE,) * 15 + (4,)),
])
def test_start_breaking_kept_constraints_rejected(grid, start):
    with pytest.raises(InfeasibleStartError):
        run_tabu(start, grid, uncovered(grid), flags_only(grid), 14.0, small_limits(), random.Random(0))


def test_start_over_fan_out_accepted(grid):
    start = Deployment(y=(True,) * 4, z=(True,), sc_to_ban=(0,) * 4, coverage=(NONE,) * 16)
    result = run_tabu(start, grid, uncovered(grid), flags_only(grid), 14.0, TabuLimits(n_max=0), random.Random(0))
    assert result.best == start


def test_single_ban_opened_in_one_iteration():
    problem = prepare(make_instance(ban_sites=[ban("BAN01", 15, 15)]))
    result = run_tabu(
        empty_deployment(problem), problem, uncovered(problem),
        lambda y, z: complete_deployment(y, z, problem), 10.0, TabuLimits(n_max=1), random.Random(0),
    )
    assert result.best.z == (True,)
    assert result.value < 16


def test_run_tabu_never_worse_and_feasible(grid):
    start = empty_deployment(grid)
    visited = []
    result = run_tabu(
        start, grid, uncovered(grid), lambda y, z: complete_deployment(y, z, grid), 12.0,
        small_limits(), random.Random(3), on_visit=visited.append,
    )
    assert result.value <= 16.0
    assert result.value == evaluate(result.best, grid).uncovered
    for deployment in visited:
        assert check_feasible(deployment, grid, cost_cap=12.0).feasible
    assert result.value == 6.0


def test_run_tabu_is_deterministic(grid):
    def run(workers):
        return run_tabu(
            empty_deployment(grid), grid, uncovered(grid), lambda y, z: complete_deployment(y, z, grid), 13.0,
            small_limits(), random.Random(9), workers=workers,
        )

    first, second, threaded = run(1), run(1), run(2)
    assert first.best == second.best
    assert first.state.deploy_counts == second.state.deploy_counts
    assert threaded.best == first.best
    assert threaded.state.deploy_counts == first.state.deploy_counts


def test_neighborhood_uses_state_and_swap_limit(grid):
    build = flags_only(grid)
    current = build((True, True, False, False), (True,))
    state = TabuState(current=current, current_value=0.0, best=current, best_value=0.0)
    candidates = neighborhood(state, grid, 100.0, build, random.Random(0), TabuLimits(n_swap=1))
    assert sum(1 for c in candidates if c.move.kind == "swap") == 1
    assert sum(1 for c in candidates if c.move.kind == "open") == 2
    assert sum(1 for c in candidates if c.move.kind == "close") == 3


def test_memoized_value_shared_between_threads(grid):
    calls = []

    def counted(deployment):
        calls.append(deployment.key)
        return float(evaluate(deployment, grid).uncovered)

    value = memoize_value(counted)
    deployments = [
        complete_deployment(flags[:4], flags[4:], grid) for flags in itertools.product((False, True), repeat=5)
    ] * 4
    with ThreadPoolExecutor(max_workers=8) as pool:
        values = list(pool.map(value, deployments))
    assert values == [float(evaluate(d, grid).uncovered) for d in deployments]
    assert len(set(calls)) == len({d.key for d in deployments})
    assert [value(d) for d in deployments] == values


def test_relaxed_search_reaches_exact_optimum():
    problems = [prepare(oracle_sized_instance(seed)) for seed in range(8)]
    hits, trials = 0, 40
    for trial in range(trials):
        rng = random.Random(trial)
        problem = problems[trial % len(problems)]
        lg = LagrangeState(
            lambda1=tuple(rng.uniform(0, 3) for _ in range(problem.n_ban)),
            lambda2=tuple(rng.uniform(0, 1.5) for _ in range(problem.n_sc)),
        )
        cap = rng.choice([10.0, 12.0, 15.0, 21.0, 26.0])
        empty = empty_deployment(problem)
        result = run_tabu(
            build_relaxed(empty.y, empty.z, problem, lg), problem,
            memoize_value(lambda deployment: relaxed_objective(deployment, problem, lg)),
            memoize_builder(lambda y, z: build_relaxed(y, z, problem, lg)),
            cap, TabuLimits(), rng,
        )
        exact, _ = exact_relaxed_optimum(problem, lg, cap)
        hits += result.value <= exact + 1e-9
    assert hits >= 38
