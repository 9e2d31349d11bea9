import functools

import pytest

from annulab import params
from annulab.convergence import convergence_study
from annulab.geometry import AnnulusSpec, SpaceForm
from annulab.problems import Discretization, solve_eigen, solve_torsion
from annulab.shape import sweep, sweep_row

SPH, EUC, HYP = SpaceForm.SPHERICAL, SpaceForm.EUCLIDEAN, SpaceForm.HYPERBOLIC

# acceptance lines collected by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def solved(geom, r0, r1, t, L):
    spec = AnnulusSpec(geom, r0, r1, t)
    d = Discretization.build(spec, L)
    tor = solve_torsion(spec, L, d)
    eig = solve_eigen(spec, L, d, start=tor.y)
    return d, tor, eig


@functools.lru_cache(maxsize=None)
def canonical_sweep(geom):
    r0, r1 = params.CANONICAL_RADII[geom]
    return tuple(sweep(geom, r0, r1, params.t_values(*params.T_GRID), params.LEVEL, params.DELTA))


@functools.lru_cache(maxsize=None)
def check_row(geom, t=params.T_CHECK, L=params.LEVEL):
    r0, r1 = params.CANONICAL_RADII[geom]
    return sweep_row(geom, r0, r1, t, L, params.DELTA)


@functools.lru_cache(maxsize=None)
def oracle_study(geom):
    r0, r1 = params.ORACLE_RADII[geom]
    return convergence_study(geom, r0, r1, params.CONVERGENCE_LEVELS)


@pytest.fixture(params=list(SpaceForm), ids=lambda g: g.tag)
def geom(request):
    return request.param


@pytest.fixture(params=[SPH, HYP], ids=lambda g: g.tag)
def curved(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
