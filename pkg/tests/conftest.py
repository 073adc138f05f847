import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_state(rng, dim):
    from wva_lab.linalg import StateVector

    raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector.of(raw)


def random_hermitian(rng, dim):
    from wva_lab.linalg import Operator

    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator(dim, (raw + raw.conj().T) / 2, hermitian=True)
