import numpy as np
import pytest

from quaddomains.circle_fourier import riesz_product
from quaddomains.conformal import build_map
from quaddomains.dss import SolverConfig, solve_branch

SINGULAR_A = (0.0, 0.0025, 0.005, 0.01, 0.02, 0.05)
CONSISTENT_A = (0.0, 0.01, 0.02, 0.05)


@pytest.fixture(scope="session")
def singular_branch():
    cfg = SolverConfig(mode="singular", measure=riesz_product(0), a_grid=SINGULAR_A)
    branch = solve_branch(cfg)
    assert branch.stop_reason == "completed"
    return branch


@pytest.fixture(scope="session")
def consistent_branch():
    cfg = SolverConfig(mode="consistent", measure=riesz_product(0), a_grid=CONSISTENT_A)
    branch = solve_branch(cfg)
    assert branch.stop_reason == "completed"
    return branch


@pytest.fixture(scope="session")
def singular_maps(singular_branch):
    return {pt.a: build_map(pt, singular_branch.config) for pt in singular_branch.points}


@pytest.fixture(scope="session")
def consistent_maps(consistent_branch):
    return {pt.a: build_map(pt, consistent_branch.config) for pt in consistent_branch.points}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
