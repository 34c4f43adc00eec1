"""Gaussian density matrices in phase space (hbar = 1).

A Gaussian state is parametrized by its mean vector and covariance matrix;
its Weyl symbol is ``det(Gamma)^{-1/2} exp(-(z-m).Gamma^{-1}(z-m)/2)``.
A Gaussian Weyl symbol is a quantum state iff all symplectic eigenvalues
of the covariance are >= 1/2.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, InvalidStateError
from .symplectic import (
    _check_symmetric,
    _pd_eig,
    symplectic_eigenvalues,
    williamson,
)

VALIDITY_TOL = 1e-9

__all__ = [
    "GaussianState",
    "ValidityReport",
    "validate",
    "purity",
    "linear_entropy",
    "von_neumann_entropy",
    "thermal_mode_entropy",
    "thermal_state",
    "wigner_eval",
    "vacuum",
    "thermal_mode",
    "squeezed",
]


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state with mean ``mean`` and covariance ``cov`` on R^{2n}."""

    n: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = _check_symmetric(np.asarray(self.cov, dtype=float))
        if mean.shape != (2 * self.n,) or cov.shape != (2 * self.n, 2 * self.n):
            raise DimensionError(
                f"mean/covariance shapes {mean.shape}/{cov.shape} do not "
                f"match n={self.n}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class ValidityReport:
    symplectic_eigenvalues: np.ndarray
    min_symplectic_eigenvalue: float
    is_valid: bool
    is_pure: bool
    partially_pure: bool


def validate(state: GaussianState, tol: float = VALIDITY_TOL) -> ValidityReport:
    """Check the quantum validity bound on the symplectic spectrum."""
    lam = symplectic_eigenvalues(state.cov)
    lam_min = float(lam[0])
    at_bound = np.abs(lam - 0.5) <= tol
    return ValidityReport(
        symplectic_eigenvalues=lam,
        min_symplectic_eigenvalue=lam_min,
        is_valid=bool(lam_min >= 0.5 - tol),
        is_pure=bool(np.all(at_bound)),
        partially_pure=bool(np.any(at_bound) and not np.all(at_bound)),
    )


def _require_valid(state: GaussianState) -> ValidityReport:
    report = validate(state)
    if not report.is_valid:
        raise InvalidStateError(
            "not a quantum state: min symplectic eigenvalue "
            f"{report.min_symplectic_eigenvalue:.6g} < 1/2")
    return report


def purity_from_cov(cov: np.ndarray) -> float:
    """2^{-n} det(Gamma)^{-1/2} without the validity check."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise InvalidStateError("covariance has non-positive determinant")
    return float(2.0 ** (-n) * math.exp(-0.5 * logdet))


def purity(state: GaussianState) -> float:
    """tr(rho^2) = 2^{-n} det(Gamma)^{-1/2} for a valid Gaussian state."""
    _require_valid(state)
    return purity_from_cov(state.cov)


def linear_entropy(state: GaussianState) -> float:
    return 1.0 - purity(state)


def thermal_mode_entropy(tau: float) -> float:
    """Von Neumann entropy (bits) of a single thermal mode with parameter tau.

    tau = 1 is the pure limit and contributes exactly 0 (explicit branch).
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"thermal parameter must be in (0, 1], got {tau}")
    if tau >= 1.0 - 1e-14:
        return 0.0
    return ((1.0 - tau) / (2.0 * tau) * math.log((1.0 + tau) / (1.0 - tau))
            - math.log(2.0 * tau / (1.0 + tau))) / math.log(2.0)


def von_neumann_entropy(state: GaussianState) -> float:
    """Mode-wise entropy sum over tau_j = 1/(2 lambda_j), in bits."""
    report = _require_valid(state)
    total = 0.0
    for lam in report.symplectic_eigenvalues:
        tau = min(1.0, 1.0 / (2.0 * float(lam)))
        total += thermal_mode_entropy(tau)
    return total


def thermal_state(hamiltonian, beta: float) -> GaussianState:
    """Gibbs state of a positive-definite quadratic Hamiltonian.

    ``hamiltonian`` is either the 2n x 2n Hessian of the quadratic form or an
    object exposing ``hessian_at(t)``.  The covariance is assembled from the
    Williamson normal form of the Hessian: each normal mode of frequency
    lam_j carries covariance 1/(2 tanh(beta lam_j / 2)).
    """
    if beta <= 0:
        raise ValueError("inverse temperature must be positive")
    if hasattr(hamiltonian, "hessian_at"):
        hess = hamiltonian.hessian_at(0.0)
    else:
        hess = np.asarray(hamiltonian, dtype=float)
    _pd_eig(hess)  # raises on non-positive Hessian
    S, lam = williamson(hess)
    occ = 1.0 / (2.0 * np.tanh(0.5 * beta * lam))
    D = np.diag(np.concatenate([occ, occ]))
    cov = S @ D @ S.T
    n = hess.shape[0] // 2
    return GaussianState(n=n, mean=np.zeros(2 * n), cov=0.5 * (cov + cov.T))


def wigner_eval(state: GaussianState, z: np.ndarray) -> float:
    """Weyl symbol of the state at phase-space point(s) z.

    Normalization: peak value ``det(Gamma)^{-1/2}``; the quasi-probability
    density carries an extra (2 pi)^{-n} at integration call-sites.
    """
    _require_valid(state)
    z = np.asarray(z, dtype=float)
    dz = (z - state.mean).reshape(-1, 2 * state.n)
    sign, logdet = np.linalg.slogdet(state.cov)
    c = math.exp(-0.5 * logdet)
    sol = np.linalg.solve(state.cov, dz.T).T
    quad = np.sum(dz * sol, axis=-1).reshape(z.shape[:-1])
    return c * np.exp(-0.5 * quad)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def vacuum(n: int) -> GaussianState:
    """Ground state of n harmonic modes: Gamma = I/2."""
    return GaussianState(n=n, mean=np.zeros(2 * n), cov=0.5 * np.eye(2 * n))


def thermal_mode(tau: float, n: int = 1) -> GaussianState:
    """Product of n identical thermal modes with parameter tau = tanh(beta/2)."""
    if not 0.0 < tau <= 1.0:
        raise InvalidStateError(f"thermal parameter must be in (0, 1], got {tau}")
    return GaussianState(n=n, mean=np.zeros(2 * n),
                         cov=np.eye(2 * n) / (2.0 * tau))


def squeezed(r: float, n: int = 1) -> GaussianState:
    """Pure squeezed vacuum: position variance e^{2r}/2 per mode."""
    diag = np.concatenate([np.full(n, 0.5 * math.exp(2 * r)),
                           np.full(n, 0.5 * math.exp(-2 * r))])
    return GaussianState(n=n, mean=np.zeros(2 * n), cov=np.diag(diag))
