import numpy as np
import pytest

from subnewton import LogisticObjective, synthesize


@pytest.fixture(scope="session")
def small_data():
    return synthesize(200, 8, seed=7)


@pytest.fixture(scope="session")
def small_obj(small_data):
    return LogisticObjective(small_data, lam=0.05)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
