import numpy as np
import pytest

from nll.classify import ConfusionMatrix
from nll.noise import ClassPrior, TransitionMatrix, uniform_noise
from nll.data import tabular_world


@pytest.fixture(scope="session")
def world():
    return tabular_world()


@pytest.fixture(scope="session")
def t_quarter():
    return uniform_noise(2, 0.25)


def random_confusion(rng: np.random.Generator, k: int) -> ConfusionMatrix:
    rows = rng.gamma(1.0, size=(k, k)) + 1e-12
    rows /= rows.sum(axis=1, keepdims=True)
    return ConfusionMatrix(rows, np.ones(k, dtype=bool))


def random_dominant_transition(rng: np.random.Generator, k: int) -> TransitionMatrix:
    rows = np.empty((k, k))
    for i in range(k):
        while True:
            diag = rng.uniform(1.0 / k + 0.02, 0.98)
            rest = rng.gamma(1.0, size=k - 1) + 1e-9
            rest = rest / rest.sum() * (1.0 - diag)
            if rest.max() < diag - 1e-6:
                rows[i] = np.insert(rest, i, diag)
                break
    return TransitionMatrix(rows)


def random_positive_prior(rng: np.random.Generator, k: int) -> ClassPrior:
    p = rng.gamma(1.0, size=k) + 0.05
    return ClassPrior(p / p.sum())
