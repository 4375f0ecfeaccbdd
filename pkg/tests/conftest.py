import numpy as np
import pytest

from solnoise.grid import make_grid


@pytest.fixture(scope="session")
def grid512():
    return make_grid(512, 10.0)


@pytest.fixture(scope="session")
def grid1024():
    return make_grid(1024, 20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
