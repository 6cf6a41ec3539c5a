import numpy as np
import pytest

from python_sta.hamiltonian import StirapHamiltonian, StirapParams, tr_hamiltonian
from python_sta.propagator import (
    REFERENCE_STEPS,
    default_steps,
    evolve,
    ket,
    substeps_for,
    uniform_grid,
)
from python_sta.rescale import RescaleParams

GRID_POINTS = 1001


@pytest.fixture(scope="session")
def nominal() -> StirapParams:
    return StirapParams.nominal()


@pytest.fixture(scope="session")
def reference_trajectory(nominal):
    grid = uniform_grid(nominal.t_f, GRID_POINTS)
    return evolve(StirapHamiltonian(nominal), ket(1), grid, substeps_for(REFERENCE_STEPS, grid))


@pytest.fixture(scope="session")
def tr_trajectories(nominal):
    """Numeric TR trajectories for a = 2 and a = 10 on the reference grid divided by a."""
    trajectories = {}
    for a in (2.0, 10.0):
        r = RescaleParams(a, nominal.t_f)
        grid = uniform_grid(nominal.t_f, GRID_POINTS) / a
        trajectories[a] = evolve(tr_hamiltonian(StirapHamiltonian(nominal), r), ket(1), grid,
                                 substeps_for(default_steps(r), grid))
    return trajectories


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
