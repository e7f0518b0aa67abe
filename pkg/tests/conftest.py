import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


def random_hermitian(dim, rng, trace_one=True):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = m + m.conj().T
    if trace_one:
        m = m + dim * np.eye(dim)
        m = m / np.trace(m).real
    return m


@pytest.fixture
def herm16(rng):
    return random_hermitian(16, rng)
