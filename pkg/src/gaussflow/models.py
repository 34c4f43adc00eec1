"""Reference models with independently checkable dynamics.

Two coupled oscillators (closed-form flow blocks, valid for stable and
unstable environment frequencies) and the N-oscillator Brownian-motion bath
with its memory kernel and integro-differential position equation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import memory_convolution
from .bipartite import BipartiteSystem, QuadraticHamiltonian, full_flow
from .exceptions import GridResolutionError
from .symplectic import PhaseSpaceFlow

__all__ = [
    "TwoOscillatorParams",
    "two_oscillator_flow",
    "two_oscillator_det_ii",
    "two_oscillator_system",
    "QBMParams",
    "qbm_build",
    "qbm_kernel",
    "qbm_residual",
]


# ---------------------------------------------------------------------------
# entire-function branches: cos(t sqrt(lam)) and sin(t sqrt(lam))/sqrt(lam)
# stay real-analytic across lam = 0 (unstable environment, lam < 0)
# ---------------------------------------------------------------------------

def _cos_sqrt(lam: float, t: float) -> float:
    if lam > 1e-12:
        return math.cos(t * math.sqrt(lam))
    if lam < -1e-12:
        return math.cosh(t * math.sqrt(-lam))
    x = lam * t * t
    return 1.0 - x / 2.0 + x * x / 24.0


def _sinc_sqrt(lam: float, t: float) -> float:
    if lam > 1e-12:
        r = math.sqrt(lam)
        return math.sin(t * r) / r
    if lam < -1e-12:
        r = math.sqrt(-lam)
        return math.sinh(t * r) / r
    x = lam * t * t
    return t * (1.0 - x / 6.0 + x * x / 120.0)


@dataclass(frozen=True)
class TwoOscillatorParams:
    """One oscillator coupled to one (possibly unstable) oscillator.

    ``omega_e_sq`` may be negative; ``gamma`` is the position-position
    coupling strength.  The normal-mode data lambda_plus/minus and the
    mixing angle are fixed at construction.
    """

    omega_s: float
    omega_e_sq: float
    gamma: float
    lam_plus: float = field(init=False)
    lam_minus: float = field(init=False)

    def __post_init__(self):
        if self.omega_s <= 0:
            raise ValueError("omega_s must be positive")
        delta = self.omega_s ** 2 - self.omega_e_sq
        disc = math.sqrt(delta ** 2 + 4.0 * self.gamma ** 2)
        half_sum = 0.5 * (self.omega_s ** 2 + self.omega_e_sq)
        object.__setattr__(self, "lam_plus", half_sum + 0.5 * disc)
        object.__setattr__(self, "lam_minus", half_sum - 0.5 * disc)

    @property
    def _angle_terms(self):
        """(cos^2, sin^2, sin*cos) of the normal-mode mixing angle."""
        delta = self.omega_s ** 2 - self.omega_e_sq
        disc = math.sqrt(delta ** 2 + 4.0 * self.gamma ** 2)
        if disc == 0.0:  # gamma = 0 and equal frequencies: no mixing
            return 1.0, 0.0, 0.0
        c2 = 0.5 * (1.0 + delta / disc)
        s2 = 0.5 * (1.0 - delta / disc)
        return c2, s2, self.gamma / disc


def two_oscillator_flow(p: TwoOscillatorParams, t: float) -> PhaseSpaceFlow:
    """Closed-form flow of the coupled pair in block coordinates (d=N=1)."""
    c2, s2, sc = p._angle_terms
    cp = _cos_sqrt(p.lam_plus, t)
    cm = _cos_sqrt(p.lam_minus, t)
    sp = _sinc_sqrt(p.lam_plus, t)
    sm = _sinc_sqrt(p.lam_minus, t)

    ii = np.array([
        [c2 * cp + s2 * cm, c2 * sp + s2 * sm],
        [-(c2 * p.lam_plus * sp + s2 * p.lam_minus * sm), c2 * cp + s2 * cm],
    ])
    ie = sc * np.array([
        [cp - cm, sp - sm],
        [-(p.lam_plus * sp - p.lam_minus * sm), cp - cm],
    ])
    ee = np.array([
        [c2 * cm + s2 * cp, c2 * sm + s2 * sp],
        [-(c2 * p.lam_minus * sm + s2 * p.lam_plus * sp), c2 * cm + s2 * cp],
    ])
    M = np.block([[ii, ie], [ie, ee]])  # ei block equals ie
    return PhaseSpaceFlow(d=1, N=1, t=t, M=M)


def two_oscillator_det_ii(p: TwoOscillatorParams, t: float) -> float:
    """Closed form of det(Phi_ii^t); equals 1 identically when gamma = 0."""
    delta = p.omega_s ** 2 - p.omega_e_sq
    disc_sq = delta ** 2 + 4.0 * p.gamma ** 2
    if disc_sq == 0.0 or p.gamma == 0.0:
        return 1.0
    cp = _cos_sqrt(p.lam_plus, t)
    cm = _cos_sqrt(p.lam_minus, t)
    sp = _sinc_sqrt(p.lam_plus, t)
    sm = _sinc_sqrt(p.lam_minus, t)
    half_sum = 0.5 * (p.lam_plus + p.lam_minus)
    return 1.0 + (2.0 * p.gamma ** 2 / disc_sq) * (
        cp * cm + half_sum * sp * sm - 1.0)


def two_oscillator_system(p: TwoOscillatorParams) -> BipartiteSystem:
    """The same model as a BipartiteSystem (numeric-flow cross-check)."""
    hs = np.diag([p.omega_s ** 2, 1.0])
    he = np.diag([p.omega_e_sq, 1.0])
    G = np.array([[p.gamma, 0.0], [0.0, 0.0]])
    return BipartiteSystem(
        system=QuadraticHamiltonian(n=1, hessian=hs),
        environment=QuadraticHamiltonian(n=1, hessian=he),
        coupling=G,
    )


# ---------------------------------------------------------------------------
# Quantum Brownian Motion bath
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QBMParams:
    """One oscillator position-coupled to N bath oscillators by springs.

    Total energy: xi^2/2m + omega_s^2 x^2/2 + sum_j [eta_j^2/2
    + k_j (y_j - x)^2 / 2].  Expanding the springs gives the counter-term
    (sum_j k_j) x^2 / 2 inside H_S and the coupling -x sum_j k_j y_j.
    """

    mass: float
    omega_s: float
    spring_constants: np.ndarray
    bath_masses: np.ndarray | None = None

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.spring_constants, dtype=float))
        if k.size and np.any(k <= 0):
            raise ValueError("spring constants must be positive")
        if self.mass <= 0:
            raise ValueError("system mass must be positive")
        m = (np.ones_like(k) if self.bath_masses is None
             else np.atleast_1d(np.asarray(self.bath_masses, dtype=float)))
        if m.shape != k.shape or np.any(m <= 0):
            raise ValueError("bath masses must be positive, one per spring")
        k.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "spring_constants", k)
        object.__setattr__(self, "bath_masses", m)

    @property
    def n_bath(self) -> int:
        return self.spring_constants.size


def qbm_build(p: QBMParams) -> BipartiteSystem:
    """Assemble the bipartite system with the counter-term inside H_S."""
    k = p.spring_constants
    N = p.n_bath
    hs = np.diag([p.omega_s ** 2 + float(np.sum(k)), 1.0 / p.mass])
    if N == 0:
        he = np.zeros((0, 0))
        G = np.zeros((2, 0))
        return BipartiteSystem(
            system=QuadraticHamiltonian(n=1, hessian=hs),
            environment=QuadraticHamiltonian(n=0, hessian=he),
            coupling=G,
        )
    he = np.diag(np.concatenate([k, 1.0 / p.bath_masses]))
    G = np.zeros((2, 2 * N))
    G[0, :N] = -k  # position-position coupling only
    return BipartiteSystem(
        system=QuadraticHamiltonian(n=1, hessian=hs),
        environment=QuadraticHamiltonian(n=N, hessian=he),
        coupling=G,
    )


def qbm_kernel(p: QBMParams, t) -> np.ndarray | float:
    """Memory kernel K(t) = sum_j k_j cos(sqrt(k_j) t) (unit bath masses)."""
    if np.any(p.bath_masses != 1.0):
        raise ValueError("memory kernel assumes unit bath masses")
    t = np.asarray(t, dtype=float)
    k = p.spring_constants
    if k.size == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    vals = np.sum(k[:, None] * np.cos(np.sqrt(k)[:, None] * t.reshape(1, -1)),
                  axis=0).reshape(t.shape)
    return vals if t.ndim else float(vals)


def _qbm_force(p: QBMParams, u0: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Driving force from the free bath motion, weighted by spring constants.

    The k_j weights and the 1/omega_j on the sine term are fixed by
    requiring the position equation to close exactly (the flow-residual test
    pins this convention).
    """
    k = p.spring_constants
    N = p.n_bath
    om = np.sqrt(k)
    y0 = u0[:N]
    eta0 = u0[N:]
    return np.sum(
        k[:, None] * (y0[:, None] * np.cos(om[:, None] * t)
                      + (eta0 / om)[:, None] * np.sin(om[:, None] * t)),
        axis=0)


def qbm_residual(p: QBMParams, z0: np.ndarray, t_grid) -> np.ndarray:
    """Residual of the memory equation for the classical position.

    Propagates the phase point ``z0 = (x, xi, y_1.., eta_1..)`` with the
    exact flow and evaluates
    ``m x'' + int_0^t K(t-s) x'(s) ds + V'(x) + K(t) x(0) - F(t)``
    with Simpson quadrature for the memory integral.  x' and x'' come
    from the flow and Hamilton's equations, not numerical differentiation.
    """
    if np.any(p.bath_masses != 1.0):
        raise ValueError("memory equation assumes unit bath masses")
    times = np.asarray(t_grid, dtype=float)
    if len(times) < 2 or times[0] != 0.0:
        raise ValueError("time grid must start at 0 with at least 2 points")
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("time grid must be uniform")
    k = p.spring_constants
    if k.size and math.sqrt(float(np.max(k))) * dt[0] > 0.5:
        raise GridResolutionError(
            "grid too coarse for the fastest bath oscillator "
            f"(max sqrt(k) dt = {math.sqrt(float(np.max(k))) * dt[0]:.3f})")

    sys = qbm_build(p)
    N = p.n_bath
    z0 = np.asarray(z0, dtype=float).reshape(2 * (1 + N))
    bundle = full_flow(sys, times)
    traj = bundle.phi @ z0  # (n_t, 2(1+N))

    x = traj[:, 0]
    xi = traj[:, 1]
    xdot = xi / p.mass
    y = traj[:, 2:2 + N]
    # m x'' = xi' = -(omega_s^2 + sum k) x + sum_j k_j y_j
    kappa = float(np.sum(k))
    m_xddot = -(p.omega_s ** 2 + kappa) * x + y @ k if N else \
        -(p.omega_s ** 2) * x

    kernel_vals = np.asarray(qbm_kernel(p, times), dtype=float) if N else \
        np.zeros_like(times)
    memory = memory_convolution(kernel_vals, xdot, float(dt[0]))
    force = _qbm_force(p, z0[2:], times) if N else np.zeros_like(times)
    return (m_xddot + memory + p.omega_s ** 2 * x
            + kernel_vals * x[0] - force)
