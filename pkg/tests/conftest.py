import numpy as np
import pytest

from gaussflow.states import GaussianState
from gaussflow.symplectic import matrix_exponential, symplectic_form


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_symplectic(n, rng, scale=0.5):
    """exp(J H) for a random symmetric H: exactly symplectic."""
    H = rng.normal(size=(2 * n, 2 * n))
    H = 0.5 * (H + H.T) * scale
    return matrix_exponential(symplectic_form(n) @ H)


def random_covariance(n, rng, pure=False, scale=0.5):
    """Random valid quantum covariance: T diag(nu, nu) T^T, nu >= 1/2."""
    T = random_symplectic(n, rng, scale)
    nu = np.full(n, 0.5) if pure else 0.5 + rng.uniform(0.0, 1.5, size=n)
    D = np.diag(np.concatenate([nu, nu]))
    cov = T @ D @ T.T
    return 0.5 * (cov + cov.T)


def random_state(n, rng, pure=False, displaced=False):
    mean = rng.normal(size=2 * n) if displaced else np.zeros(2 * n)
    return GaussianState(n=n, mean=mean, cov=random_covariance(n, rng, pure))
