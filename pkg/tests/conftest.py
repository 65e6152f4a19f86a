import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def cmat(rng, m, n, scale=1.0):
    return scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))


def rand_upper(rng, n, diag_shift=3.0):
    """Random upper triangular with diagonal pushed away from zero."""
    T = np.triu(cmat(rng, n, n))
    T += diag_shift * np.eye(n)
    return T


def hermitian(rng, n, shift=0.0):
    G = cmat(rng, n, n)
    return (G + G.conj().T) / 2 + shift * np.eye(n)
