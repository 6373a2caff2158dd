"""Shared instance builders for the planner tests."""
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest

from app.instance import generate_instance
from app.model import prepare
from models import AreaSpec, CapacityOverride, Instance, Site, SiteKind, TabuLimits, SolverConfig


def sc(site_id, x, y, cost=1.0, reach=10.5):
    return Site(id=site_id, x=x, y=y, cost=cost, kind=SiteKind.SC_CANDIDATE, coverage_distance_m=reach)


def ban(site_id, x, y, cost=10.0, reach=10.5):
    return Site(id=site_id, x=x, y=y, cost=cost, kind=SiteKind.BAN_CANDIDATE, coverage_distance_m=reach)


def make_instance(sc_sites=(), ban_sites=(), width=40.0, height=40.0, nb_max=3, overrides=()):
    return Instance(
        area=AreaSpec(width=width, height=height, subarea_side=10.0),
        sc_sites=list(sc_sites),
        ban_sites=list(ban_sites),
        nb_max=nb_max,
        capacity_overrides=[
            CapacityOverride(ban_id=b, sc_id=s, capacity_bps=c) for b, s, c in overrides
        ],
    )


def grid_instance(nb_max=3, sc001_capacity=2e8):
    """4x4 grid: BAN01 in a corner and four SCBSs, every SCBS linked to BAN01.

    Capacity 2e8 bps gives N_ki = 16 (capped at S); 1e8 bps gives N_ki = 2.
    """
    return make_instance(
        sc_sites=[
            sc("SC001", 25, 5),
            sc("SC002", 5, 25),
            sc("SC003", 25, 25),
            sc("SC004", 35, 35),
        ],
        ban_sites=[ban("BAN01", 5, 5)],
        nb_max=nb_max,
        overrides=[
            ("BAN01", "SC001", sc001_capacity),
            ("BAN01", "SC002", 2e8),
            ("BAN01", "SC003", 2e8),
            ("BAN01", "SC004", 2e8),
        ],
    )


def oracle_sized_instance(seed, n_sc=6, n_ban=2):
    """Random 4x4-subarea instance small enough for exhaustive enumeration."""
    return generate_instance(AreaSpec(width=40.0, height=40.0), n_sc=n_sc, n_ban=n_ban, seed=seed)


def small_limits():
    return TabuLimits(n_max=30, t_div=5, n_div=1, n_swap=20, n_t1=4, n_t2=6)


def small_config(seed=0):
    return SolverConfig(n_max_lagrange=2, tabu=small_limits(), seed=seed)


@pytest.fixture
def grid():
    return prepare(grid_instance())


@pytest.fixture
def empty_problem():
    return prepare(make_instance(width=20.0, height=20.0))
