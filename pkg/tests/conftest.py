import numpy as np
import pytest

from ftqec import codes


@pytest.fixture(scope="session")
def hamming():
    return codes.construct_code("hamming")


@pytest.fixture(scope="session")
def golay():
    return codes.construct_code("golay")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
