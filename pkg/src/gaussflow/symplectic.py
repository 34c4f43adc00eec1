"""Dense symplectic linear algebra.

Conventions: phase-space coordinates are ordered block-wise,
``(x_1..x_n, xi_1..xi_n)``, so the canonical symplectic form is
``J = [[0, I], [-I, 0]]``.  All matrices are real and dense.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm as _expm, schur

from .exceptions import (
    DimensionError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    StepSizeUnderflowError,
)

DEFAULT_MAX_DIM = 512

__all__ = [
    "symplectic_form",
    "SymplecticForm",
    "PhaseSpaceFlow",
    "matrix_exponential",
    "integrate_flow",
    "symplectic_eigenvalues",
    "williamson",
    "symplectic_defect",
]


def symplectic_form(n: int) -> np.ndarray:
    """Matrix of the canonical symplectic form on R^{2n} (block layout)."""
    if n < 0:
        raise DimensionError("mode count must be non-negative")
    if n == 0:
        return np.zeros((0, 0))
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class SymplecticForm:
    """Canonical symplectic form on a 2n-dimensional phase space."""

    n: int
    J: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "J", symplectic_form(self.n))


def symplectic_defect(M: np.ndarray) -> float:
    """Max-norm deviation of ``M^T J M`` from ``J``."""
    n = M.shape[0] // 2
    J = symplectic_form(n)
    return float(np.max(np.abs(M.T @ J @ M - J)))


@dataclass(frozen=True)
class PhaseSpaceFlow:
    """A symplectic flow map on the bipartite phase space R^{2d} + R^{2N}.

    The matrix acts on coordinates ordered system-first, each subsystem in
    block layout, so the four named blocks are plain sub-matrices.
    """

    d: int
    N: int
    t: float
    M: np.ndarray

    def __post_init__(self):
        m = 2 * (self.d + self.N)
        if self.M.shape != (m, m):
            raise DimensionError(
                f"flow matrix must be {m}x{m}, got {self.M.shape}")

    @property
    def ii(self) -> np.ndarray:
        return self.M[: 2 * self.d, : 2 * self.d]

    @property
    def ie(self) -> np.ndarray:
        return self.M[: 2 * self.d, 2 * self.d:]

    @property
    def ei(self) -> np.ndarray:
        return self.M[2 * self.d:, : 2 * self.d]

    @property
    def ee(self) -> np.ndarray:
        return self.M[2 * self.d:, 2 * self.d:]

    def symplectic_defect(self) -> float:
        J = direct_sum_form(self.d, self.N)
        return float(np.max(np.abs(self.M.T @ J @ self.M - J)))


def direct_sum_form(d: int, N: int) -> np.ndarray:
    """J_S + J_E on the system-first ordering of the total phase space."""
    out = np.zeros((2 * (d + N), 2 * (d + N)))
    out[: 2 * d, : 2 * d] = symplectic_form(d)
    out[2 * d:, 2 * d:] = symplectic_form(N)
    return out


def _check_square_finite(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _check_symmetric(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    M = _check_square_finite(M)
    if M.size == 0:
        return M
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > tol * scale:
        raise NotSymmetricError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def matrix_exponential(M: np.ndarray, t: float = 1.0,
                       max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """exp(t M) by scaling-and-squaring with diagonal Pade approximation."""
    M = _check_square_finite(M)
    if M.shape[0] > max_dim:
        raise DimensionError(
            f"dimension {M.shape[0]} exceeds configured maximum {max_dim}")
    return _expm(t * M)


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192,
                   -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def integrate_flow(generator, t0: float, t1: float, tol: float = 1e-10,
                   return_info: bool = False):
    """Time-ordered solution U(t1, t0) of ``dU/dt = generator(t) U``, U(t0)=I.

    Adaptive embedded Runge-Kutta 5(4) with per-step local error <= tol.
    No symplectic projection is applied: the symplecticity deviation of the
    result is reported in the info dict, never corrected.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    K0 = _check_square_finite(np.asarray(generator(t0), dtype=float),
                              "generator output")
    m = K0.shape[0]
    U = np.eye(m)
    if t1 == t0:
        return (U, {"steps": 0, "rejected": 0}) if return_info else U

    span = t1 - t0
    norm0 = max(np.max(np.abs(K0)), 1e-12)
    h = min(span, 0.1 / norm0)
    t = t0
    steps = 0
    rejected = 0
    h_min = span * 1e-14

    while t < t1:
        h = min(h, t1 - t)
        if h < h_min:
            raise StepSizeUnderflowError(
                f"step size underflow at t={t:.6g} (stiff generator?)")
        k = []
        for i in range(7):
            Ui = U.copy()
            for j, a in enumerate(_DP_A[i]):
                if a != 0.0:
                    Ui = Ui + (h * a) * k[j]
            Ki = np.asarray(generator(t + _DP_C[i] * h), dtype=float)
            if not np.all(np.isfinite(Ki)):
                raise ValueError(f"generator returned non-finite matrix at t={t}")
            k.append(Ki @ Ui)
        U5 = U.copy()
        err_mat = np.zeros_like(U)
        for i in range(7):
            if _DP_B5[i] != 0.0:
                U5 = U5 + (h * _DP_B5[i]) * k[i]
            db = _DP_B5[i] - _DP_B4[i]
            if db != 0.0:
                err_mat = err_mat + (h * db) * k[i]
        err = np.max(np.abs(err_mat)) / (1.0 + np.max(np.abs(U5)))
        if err <= tol:
            t += h
            U = U5
            steps += 1
        else:
            rejected += 1
        factor = 0.9 * (tol / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))

    if return_info:
        info = {"steps": steps, "rejected": rejected}
        if m % 2 == 0:
            info["symplectic_defect"] = symplectic_defect(U)
        return U, info
    return U


def _pd_eig(gamma: np.ndarray, tol: float = 1e-12):
    gamma = _check_symmetric(gamma)
    w, V = np.linalg.eigh(gamma)
    scale = float(np.max(np.abs(w)))
    if w[0] <= tol * scale:
        raise NotPositiveDefiniteError(
            f"matrix not positive-definite (min eigenvalue {w[0]:.3e})")
    return w, V


def _pd_power(gamma: np.ndarray, p: float) -> np.ndarray:
    w, V = _pd_eig(gamma)
    return (V * w ** p) @ V.T


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a positive-definite matrix, ascending.

    Returns the n positive eigenvalues (with multiplicity) of ``|J Gamma|``.
    """
    gamma = _check_symmetric(gamma)
    n = gamma.shape[0] // 2
    J = symplectic_form(n)
    # K = Gamma^{1/2} J Gamma^{1/2} is antisymmetric with spectrum {+-i nu};
    # K K^T is symmetric with each nu^2 doubled
    g_sqrt = _pd_power(gamma, 0.5)
    K = g_sqrt @ J @ g_sqrt
    w = np.linalg.eigvalsh(K @ K.T)
    vals = np.sqrt(np.maximum(w, 0.0))
    # eigenvalues come in pairs; average each pair
    vals = np.sort(vals)
    return 0.5 * (vals[0::2] + vals[1::2])


def williamson(gamma: np.ndarray):
    """Williamson normal form of a positive-definite 2n x 2n matrix.

    Returns ``(S, lam)`` with S symplectic and
    ``S.T @ gamma @ S = diag(lam_1..lam_n, lam_1..lam_n)``, lam ascending.
    Construction: block-diagonalize the antisymmetric matrix
    ``gamma^{-1/2} J gamma^{-1/2}`` by a real Schur decomposition.
    """
    gamma = _check_symmetric(gamma)
    n = gamma.shape[0] // 2
    J = symplectic_form(n)
    g_isqrt = _pd_power(gamma, -0.5)
    A = g_isqrt @ J @ g_isqrt
    A = 0.5 * (A - A.T)
    T, Z = schur(A, output="real")

    nu = np.empty(n)
    pos_cols = np.empty((2 * n, n))
    mom_cols = np.empty((2 * n, n))
    for k in range(n):
        b = T[2 * k, 2 * k + 1]
        z1 = Z[:, 2 * k]
        z2 = Z[:, 2 * k + 1]
        if b >= 0.0:
            nu[k] = b
            pos_cols[:, k], mom_cols[:, k] = z1, z2
        else:
            nu[k] = -b
            pos_cols[:, k], mom_cols[:, k] = z2, z1
    if np.min(nu) <= 0.0:
        raise NotPositiveDefiniteError("degenerate symplectic spectrum")

    lam = 1.0 / nu
    order = np.argsort(lam)
    lam = lam[order]
    R = np.hstack([pos_cols[:, order], mom_cols[:, order]])
    B = np.diag(np.concatenate([nu[order] ** -0.5, nu[order] ** -0.5]))
    S = g_isqrt @ R @ B
    return S, lam
