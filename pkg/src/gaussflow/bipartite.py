"""Bilinearly coupled quadratic system + environment, and their flows.

The total phase space is ordered system-first: ``(x, xi, y, eta)`` with the
system block ``(x, xi)`` of size 2d and the environment block ``(y, eta)``
of size 2N.  The total Hamiltonian is ``H_S + H_E + z . G u``.
"""

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .exceptions import DimensionError
from .symplectic import (
    PhaseSpaceFlow,
    _check_symmetric,
    direct_sum_form,
    integrate_flow,
    matrix_exponential,
    symplectic_form,
)

MatrixLike = Union[np.ndarray, Callable[[float], np.ndarray]]

__all__ = [
    "QuadraticHamiltonian",
    "BipartiteSystem",
    "FlowBundle",
    "total_hessian",
    "full_flow",
    "flow_at_time",
    "interaction_generator",
]


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Quadratic Hamiltonian ``H(z) = z . hessian(t) z / 2`` on R^{2n}."""

    n: int
    hessian: MatrixLike

    @property
    def is_autonomous(self) -> bool:
        return not callable(self.hessian)

    def hessian_at(self, t: float) -> np.ndarray:
        h = self.hessian(t) if callable(self.hessian) else self.hessian
        h = _check_symmetric(np.asarray(h, dtype=float))
        if h.shape != (2 * self.n, 2 * self.n):
            raise DimensionError(
                f"hessian must be {2 * self.n}x{2 * self.n}, got {h.shape}")
        return h

    def generator_at(self, t: float) -> np.ndarray:
        """J times the Hessian: right-hand side of the linear flow ODE."""
        return symplectic_form(self.n) @ self.hessian_at(t)


@dataclass(frozen=True)
class BipartiteSystem:
    system: QuadraticHamiltonian
    environment: QuadraticHamiltonian
    coupling: MatrixLike

    @property
    def d(self) -> int:
        return self.system.n

    @property
    def N(self) -> int:
        return self.environment.n

    @property
    def is_autonomous(self) -> bool:
        return (self.system.is_autonomous and self.environment.is_autonomous
                and not callable(self.coupling))

    def coupling_at(self, t: float) -> np.ndarray:
        G = self.coupling(t) if callable(self.coupling) else self.coupling
        G = np.asarray(G, dtype=float)
        if G.shape != (2 * self.d, 2 * self.N):
            raise DimensionError(
                f"coupling must be {2 * self.d}x{2 * self.N}, got {G.shape}")
        return G


def total_hessian(sys: BipartiteSystem, t: float = 0.0) -> np.ndarray:
    """Hessian of H_S + H_E + z.Gu on the total phase space."""
    d, N = sys.d, sys.N
    out = np.zeros((2 * (d + N), 2 * (d + N)))
    out[: 2 * d, : 2 * d] = sys.system.hessian_at(t)
    out[2 * d:, 2 * d:] = sys.environment.hessian_at(t)
    G = sys.coupling_at(t)
    out[: 2 * d, 2 * d:] = G
    out[2 * d:, : 2 * d] = G.T
    return out


def _total_generator(sys: BipartiteSystem):
    J = direct_sum_form(sys.d, sys.N)

    def gen(t: float) -> np.ndarray:
        return J @ total_hessian(sys, t)

    return gen


def _symplectic_inverse(M: np.ndarray, J: np.ndarray) -> np.ndarray:
    return -J @ M.T @ J


@dataclass(frozen=True)
class FlowBundle:
    """Full and interaction flows sampled on a time grid.

    ``phi[k]`` is the full flow at ``times[k]``; ``psi[k]`` the interaction
    flow ``Phi_0^{-1} Phi``; ``g_t[k]`` the interaction-picture coupling
    ``Phi_S^T G Phi_E``.  All arrays are immutable after construction.
    """

    d: int
    N: int
    times: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    phi_s: np.ndarray
    phi_e: np.ndarray
    g_t: np.ndarray
    max_symplectic_defect: float = field(default=0.0)

    def __post_init__(self):
        for arr in (self.times, self.phi, self.psi, self.phi_s, self.phi_e,
                    self.g_t):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def phi_ii(self) -> np.ndarray:
        return self.phi[:, : 2 * self.d, : 2 * self.d]

    @property
    def phi_ie(self) -> np.ndarray:
        return self.phi[:, : 2 * self.d, 2 * self.d:]

    @property
    def phi_ei(self) -> np.ndarray:
        return self.phi[:, 2 * self.d:, : 2 * self.d]

    @property
    def phi_ee(self) -> np.ndarray:
        return self.phi[:, 2 * self.d:, 2 * self.d:]

    @property
    def psi_ii(self) -> np.ndarray:
        return self.psi[:, : 2 * self.d, : 2 * self.d]

    @property
    def psi_ie(self) -> np.ndarray:
        return self.psi[:, : 2 * self.d, 2 * self.d:]

    @property
    def psi_ei(self) -> np.ndarray:
        return self.psi[:, 2 * self.d:, : 2 * self.d]

    @property
    def psi_ee(self) -> np.ndarray:
        return self.psi[:, 2 * self.d:, 2 * self.d:]

    def flow_at(self, k: int) -> PhaseSpaceFlow:
        return PhaseSpaceFlow(d=self.d, N=self.N, t=float(self.times[k]),
                              M=self.phi[k])

    def interaction_flow_at(self, k: int) -> PhaseSpaceFlow:
        return PhaseSpaceFlow(d=self.d, N=self.N, t=float(self.times[k]),
                              M=self.psi[k])


def _propagate_grid(generator, times, autonomous, tol):
    """Cumulative propagator U(t_k, 0) over a sorted grid starting at 0."""
    m = np.asarray(generator(times[0])).shape[0]
    out = np.empty((len(times), m, m))
    out[0] = np.eye(m)
    step_cache = {}
    for k in range(1, len(times)):
        t0, t1 = times[k - 1], times[k]
        dt = t1 - t0
        if autonomous:
            key = round(dt, 15)
            if key not in step_cache:
                step_cache[key] = matrix_exponential(generator(0.0), dt)
            step = step_cache[key]
        else:
            step = integrate_flow(generator, t0, t1, tol=tol)
        out[k] = step @ out[k - 1]
    return out


def full_flow(sys: BipartiteSystem, t_grid, tol: float = 1e-10) -> FlowBundle:
    """Compute the full, free and interaction flows over a time grid.

    The grid must be sorted and start at 0.  Flows accumulate step products
    ``U(t_{k+1},0) = U(t_{k+1},t_k) U(t_k,0)``; autonomous steps use the
    matrix exponential, time-dependent ones the adaptive integrator.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] != 0.0:
        raise ValueError("time grid must be 1-d and start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")

    d, N = sys.d, sys.N
    phi = _propagate_grid(_total_generator(sys), times, sys.is_autonomous, tol)
    phi_s = _propagate_grid(sys.system.generator_at, times,
                            sys.system.is_autonomous, tol)
    phi_e = _propagate_grid(sys.environment.generator_at, times,
                            sys.environment.is_autonomous, tol)

    J_S = symplectic_form(d)
    J_E = symplectic_form(N)
    psi = np.empty_like(phi)
    g_t = np.empty((len(times), 2 * d, 2 * N))
    for k in range(len(times)):
        phi0_inv = np.zeros_like(phi[k])
        phi0_inv[: 2 * d, : 2 * d] = _symplectic_inverse(phi_s[k], J_S)
        phi0_inv[2 * d:, 2 * d:] = _symplectic_inverse(phi_e[k], J_E)
        psi[k] = phi0_inv @ phi[k]
        g_t[k] = phi_s[k].T @ sys.coupling_at(times[k]) @ phi_e[k]

    J = direct_sum_form(d, N)
    defect = max(
        float(np.max(np.abs(np.einsum("kji,jl,klm->kim", phi, J, phi) - J))),
        float(np.max(np.abs(np.einsum("kji,jl,klm->kim", psi, J, psi) - J))),
    )
    return FlowBundle(d=d, N=N, times=times, phi=phi, psi=psi, phi_s=phi_s,
                      phi_e=phi_e, g_t=g_t, max_symplectic_defect=defect)


def flow_at_time(sys: BipartiteSystem, t: float, tol: float = 1e-10):
    """Full flow, free flows, interaction flow and G(t) at a single time.

    Supports negative t for autonomous systems (used by finite-difference
    derivative checks).
    """
    d, N = sys.d, sys.N
    if sys.is_autonomous:
        phi = matrix_exponential(_total_generator(sys)(0.0), t)
        phi_s = matrix_exponential(sys.system.generator_at(0.0), t)
        phi_e = matrix_exponential(sys.environment.generator_at(0.0), t)
    else:
        if t < 0:
            raise ValueError("negative times need an autonomous system")
        phi = integrate_flow(_total_generator(sys), 0.0, t, tol=tol)
        phi_s = integrate_flow(sys.system.generator_at, 0.0, t, tol=tol)
        phi_e = integrate_flow(sys.environment.generator_at, 0.0, t, tol=tol)
    phi0_inv = np.zeros_like(phi)
    phi0_inv[: 2 * d, : 2 * d] = _symplectic_inverse(phi_s, symplectic_form(d))
    phi0_inv[2 * d:, 2 * d:] = _symplectic_inverse(phi_e, symplectic_form(N))
    psi = phi0_inv @ phi
    g_t = phi_s.T @ sys.coupling_at(t) @ phi_e
    return {"phi": PhaseSpaceFlow(d=d, N=N, t=t, M=phi),
            "psi": PhaseSpaceFlow(d=d, N=N, t=t, M=psi),
            "phi_s": phi_s, "phi_e": phi_e, "g_t": g_t}


def interaction_generator(sys: BipartiteSystem, t: float,
                          tol: float = 1e-10) -> np.ndarray:
    """Generator ``J grad^2 V(t)`` of the interaction flow at time t."""
    d, N = sys.d, sys.N
    g_t = flow_at_time(sys, t, tol=tol)["g_t"]
    hess = np.zeros((2 * (d + N), 2 * (d + N)))
    hess[: 2 * d, 2 * d:] = g_t
    hess[2 * d:, : 2 * d] = g_t.T
    return direct_sum_form(d, N) @ hess
