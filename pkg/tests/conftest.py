import numpy as np
import pytest

from momtraj import grid_1d, grid_2d


@pytest.fixture
def grid512():
    return grid_1d(512, 40.0)


@pytest.fixture
def grid_wide():
    return grid_1d(512, 80.0)


@pytest.fixture
def grid2d():
    return grid_2d(128, 40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
