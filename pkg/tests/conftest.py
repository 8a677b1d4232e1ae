import numpy as np
import pytest

from reputax import Economy, GridSpec, SolverConfig, solve_vfi

# Small grids keep the suite fast; grid-step-scaled tolerances scale with them.
SMALL_THETA = 101
SMALL_GRID = GridSpec(n_l=21, n_b=21)

_solve_cache: dict = {}


def solve_cached(config: SolverConfig):
    """Share converged solves across tests (configs are frozen and hashable)."""
    if config not in _solve_cache:
        _solve_cache[config] = solve_vfi(config)
    return _solve_cache[config]


@pytest.fixture(scope="session")
def quant_economy():
    return Economy(backend="quant")


@pytest.fixture(scope="session")
def general_economy():
    return Economy(backend="general")


@pytest.fixture(scope="session")
def small_config(quant_economy):
    return SolverConfig(theta_grid_size=SMALL_THETA, grid_spec=SMALL_GRID,
                        economy=quant_economy)


@pytest.fixture(scope="session")
def small_result(small_config):
    return solve_cached(small_config)


def theta_step(config: SolverConfig) -> float:
    return 1.0 / (config.theta_grid_size - 1)
