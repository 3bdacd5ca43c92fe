import numpy as np
import pytest

from closedchain.fixtures import ankle, knee, knee_parallelogram


@pytest.fixture(scope="session")
def knee_params():
    return knee()


@pytest.fixture(scope="session")
def knee_par_params():
    return knee_parallelogram()


@pytest.fixture(scope="session")
def ankle_params():
    return ankle()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
