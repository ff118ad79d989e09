import numpy as np
import pytest

from quantscatter.presets import generic_lambda

Z = np.array([0.0, 0.0, 1.0])


@pytest.fixture
def lam_aniso():
    return generic_lambda(0.1)


@pytest.fixture
def lam_iso():
    return 0.1 * np.eye(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
