import numpy as np
import pytest

from rollmono.core import BodyState, DEFAULT_PARAMS


@pytest.fixture
def params():
    return DEFAULT_PARAMS


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng):
    M = rng.uniform(-1.0, 1.0, 3)
    gamma = rng.normal(size=3)
    gamma /= np.linalg.norm(gamma)
    return BodyState(M, gamma)
