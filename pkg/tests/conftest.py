import numpy as np
import pytest

import morsekick as mk


@pytest.fixture(scope="session")
def hf():
    return mk.MOLECULES["hf"]


@pytest.fixture(scope="session")
def grid_default():
    return mk.make_grid(-2.0, 38.0, 2048)


@pytest.fixture(scope="session")
def grid_small():
    # Same box, coarser: plenty of momentum headroom, much cheaper eigh.
    return mk.make_grid(-2.0, 38.0, 1024)


@pytest.fixture(scope="session")
def basis_default(hf, grid_default):
    return mk.solve_bound_states(hf, grid_default)


@pytest.fixture(scope="session")
def basis_small(hf, grid_small):
    return mk.solve_bound_states(hf, grid_small)


@pytest.fixture(scope="session")
def ground_small(basis_small):
    return basis_small.states[0]


def normalized_gaussian(grid, center, sigma, momentum=0.0):
    x = grid.x
    psi = np.exp(-((x - center) ** 2) / (4.0 * sigma**2)) * np.exp(1j * momentum * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return mk.Wavefunction(grid, psi)
