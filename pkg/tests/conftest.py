"""
Shared fixtures for the ASSIST test suite.
"""

import numpy as np
import pytest

from assist import Assist, AssistConfig, Dataset, Hyperparams, ResponseScale
from assist.simgen import gen_regression


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def fast_hp():
    """Hyperparameters small enough for unit tests."""
    return Hyperparams(r=1, s1=2, s2=2, H=1, lam=0.01, n_starts=1, max_admm_iters=5, max_inner_iters=50, seed=7)


@pytest.fixture
def small_dataset():
    data, _ = gen_regression(d=4, r=1, s=2, n=30, seed=3)
    return data


@pytest.fixture
def small_regression():
    return gen_regression(d=4, r=1, s=2, n=30, seed=3)


@pytest.fixture
def unit_dataset():
    """Four samples of 2x2 predictors with responses already in [-1, 1]."""
    predictors = np.arange(16, dtype=np.float64).reshape(4, 2, 2) / 16.0
    responses = np.array([-1.0, -0.5, 0.5, 1.0])
    return Dataset(predictors, responses, np.zeros((4, 0)), ResponseScale.identity())


@pytest.fixture
def client():
    return Assist(AssistConfig(n_jobs=1))
