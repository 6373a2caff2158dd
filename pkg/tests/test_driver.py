"""Tests for the adaptive epsilon-constraint driver and the single-level baseline."""
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest

from app.driver import (
    BOUND_EXACT,
    BOUND_HEURISTIC,
    METHOD_SINGLE_TABU,
    resolve_steps,
    solve,
    solve_single_level,
    update_epsilon,
    validate_config,
)
from app.errors import ConfigError
from app.model import check_feasible, evaluate, prepare
from app.oracle import enumerate_frontier, exact_eps_optimum
from app.pareto import dominates
from conftest import grid_instance, make_instance, oracle_sized_instance, small_config
from models import SolverConfig


def test_update_epsilon():
    assert update_epsilon(30.0, [23.0, 25.0], 1.0) == 22.0
    assert update_epsilon(30.0, [], 1.0) == 29.0
    assert update_epsilon(10.0, [12.0], 6.0) == 4.0


@pytest.mark.parametrize("delta_c", [0.0, -1.0])
def test_update_epsilon_rejects_nonpositive_step(delta_c):
    with pytest.raises(ConfigError):
        update_epsilon(10.0, [], delta_c)


def test_invalid_config_rejected_before_search():
    with pytest.raises(ConfigError):
        validate_config(SolverConfig.model_construct(delta_c=-1.0))
    with pytest.raises(ConfigError):
        solve(grid_instance(), SolverConfig.model_construct(delta_c=-1.0))


def test_default_steps(grid):
    assert resolve_steps(grid, SolverConfig()) == (1.0, 2.0)
    assert resolve_steps(grid, SolverConfig(delta_c=0.5, delta_eps=3.0)) == (0.5, 3.0)


def test_instance_without_sites():
    report = solve(make_instance(width=20.0, height=20.0), small_config())
    assert [(v.cost, v.uncovered) for v in report.frontier.vectors()] == [(0.0, 4)]
    assert report.cost_caps == [0.0]
    assert report.hypervolume() == 0.0


def test_grid_frontier_is_sound(grid):
    report = solve(grid, small_config(seed=3))
    exact = enumerate_frontier(grid)
    vectors = report.frontier.vectors()
    assert (0.0, 16) in [(v.cost, v.uncovered) for v in vectors]
    for objective, deployment in report.frontier:
        assert check_feasible(deployment, grid).feasible
        assert evaluate(deployment, grid) == objective
        assert not any(dominates(objective, v) for v in exact.frontier.vectors())
    assert report.cost_caps[0] == 14.0
    assert report.cost_caps == sorted(report.cost_caps, reverse=True)
    assert len(set(report.cost_caps)) == len(report.cost_caps)
    assert 0.0 < report.hypervolume() <= 14.0 * 16


def test_exact_lower_bounds_never_exceed_optimum(grid):
    report = solve(grid, small_config(seed=1))
    exact = enumerate_frontier(grid)
    assert report.lower_bounds
    for record in report.lower_bounds:
        assert record.kind == BOUND_EXACT
        assert record.lower_bound <= exact_eps_optimum(exact, record.epsilon) + 1e-9
    assert len(report.traces) == 2 * len(report.cost_caps)


def test_heuristic_bounds_when_guard_is_small(grid):
    config = small_config().model_copy(update={"exact_bound_guard": 0})
    report = solve(grid, config)
    assert {record.kind for record in report.lower_bounds} == {BOUND_HEURISTIC}


def test_solve_is_deterministic():
    first = solve(grid_instance(), small_config(seed=7))
    second = solve(grid_instance(), small_config(seed=7))
    assert first.frontier.vectors() == second.frontier.vectors()
    assert first.cost_caps == second.cost_caps
    assert first.frontier.deployments() == second.frontier.deployments()


def test_cold_start_is_sound(grid):
    config = small_config().model_copy(update={"warm_start": False})
    report = solve(grid, config)
    for objective, deployment in report.frontier:
        assert check_feasible(deployment, grid).feasible


def test_single_level_baseline(grid):
    report = solve_single_level(grid, small_config(seed=2))
    exact = enumerate_frontier(grid)
    assert report.method == METHOD_SINGLE_TABU
    assert report.lower_bounds == []
    assert (0.0, 16) in [(v.cost, v.uncovered) for v in report.frontier.vectors()]
    for objective, deployment in report.frontier:
        assert check_feasible(deployment, grid).feasible
        assert not any(dominates(objective, v) for v in exact.frontier.vectors())


def test_frontier_matches_oracle_on_seeded_instances():
    matches = 0
    seeds = range(10)
    for seed in seeds:
        problem = prepare(oracle_sized_instance(seed))
        exact = enumerate_frontier(problem).frontier.vectors()
        report = solve(problem, SolverConfig(seed=seed))
        found = report.frontier.vectors()
        for objective in found:
            assert not any(dominates(objective, v) for v in exact), (seed, objective)
        matches += found == exact
    assert matches >= 9
