"""Exact dynamics of the reduced system.

Covariance/mean transport, master-equation coefficients, critical time,
initial purity rate, correlation onset and the grid-based Wigner pipeline.
The covariance transport
``Gamma_S(t) = Phi_ii Gamma_S(0) Phi_ii^T + Phi_ie Gamma_E(0) Phi_ie^T``
is global in time; only the master-equation coefficients become singular
when det Phi_ii vanishes.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import states as _states
from ._kernels import sample_fractional
from .bipartite import BipartiteSystem, FlowBundle, flow_at_time
from .exceptions import (
    DimensionError,
    GridResolutionError,
    InvalidStateError,
    SingularFlowError,
)
from .states import GaussianState, thermal_mode_entropy, validate
from .symplectic import (
    PhaseSpaceFlow,
    matrix_exponential,
    symplectic_eigenvalues,
    symplectic_form,
)

__all__ = [
    "MasterCoefficients",
    "ReducedTrajectory",
    "CorrelationReport",
    "evolve_reduced",
    "master_coefficients",
    "master_coefficients_at",
    "critical_time",
    "purity_rate_initial",
    "correlation_rate",
    "reduced_wigner_grid",
    "linear_entropy_curve",
    "information_loss_form",
]


@dataclass(frozen=True)
class MasterCoefficients:
    """Coefficients of the Fokker-Planck-type equation at one time.

    The drift acts as ``(A grad).z rho``, the diffusion as
    ``(B grad).grad rho`` and the mean drift as ``v.grad rho``; ``theta``
    is the accumulated thermal covariance.
    """

    t: float
    A: np.ndarray
    B: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    picture: str
    condition_number: float = float("nan")


@dataclass(frozen=True)
class ReducedTrajectory:
    times: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    purity: np.ndarray
    linear_entropy: np.ndarray
    von_neumann_entropy: np.ndarray
    det_phi_ii: np.ndarray
    min_symplectic_eigenvalue: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.times)


def _tolerant_vn_entropy(lam: np.ndarray) -> float:
    # trajectory covariances can undershoot the 1/2 bound by round-off
    total = 0.0
    for v in lam:
        tau = min(1.0, 1.0 / (2.0 * float(v)))
        total += thermal_mode_entropy(tau)
    return total


def evolve_reduced(flow: FlowBundle, rho_s0: GaussianState,
                   rho_e0: GaussianState) -> ReducedTrajectory:
    """Exact Gaussian reduced trajectory from an initial product state.

    Defined for all grid times, including at and beyond the critical time.
    """
    if rho_s0.n != flow.d or rho_e0.n != flow.N:
        raise DimensionError("state dimensions do not match the flow")
    for name, st in (("system", rho_s0), ("environment", rho_e0)):
        if not validate(st).is_valid:
            raise InvalidStateError(f"initial {name} state is not valid")

    n_t = len(flow)
    phi_ii, phi_ie = flow.phi_ii, flow.phi_ie
    cov = (phi_ii @ rho_s0.cov @ phi_ii.transpose(0, 2, 1)
           + phi_ie @ rho_e0.cov @ phi_ie.transpose(0, 2, 1))
    cov = 0.5 * (cov + cov.transpose(0, 2, 1))
    mean = phi_ii @ rho_s0.mean + phi_ie @ rho_e0.mean

    pur = np.empty(n_t)
    svn = np.empty(n_t)
    lam_min = np.empty(n_t)
    for k in range(n_t):
        pur[k] = _states.purity_from_cov(cov[k])
        lam = symplectic_eigenvalues(cov[k])
        lam_min[k] = lam[0]
        svn[k] = _tolerant_vn_entropy(lam)
    det_ii = np.linalg.det(phi_ii)
    return ReducedTrajectory(
        times=flow.times, mean=mean, cov=cov, purity=pur,
        linear_entropy=1.0 - pur, von_neumann_entropy=svn,
        det_phi_ii=det_ii, min_symplectic_eigenvalue=lam_min)


def linear_entropy_curve(trajectory: ReducedTrajectory) -> np.ndarray:
    """1 - purity per time point (delegates to the states purity formula)."""
    return 1.0 - np.array(
        [_states.purity_from_cov(c) for c in trajectory.cov])


def _coefficients_from_blocks(t, g, b_ii, b_ie, b_ei, b_ee, cov_e, m_e,
                              picture, det_tol):
    d = b_ii.shape[0] // 2
    J_S = symplectic_form(d)
    det = float(np.linalg.det(b_ii))
    if abs(det) < det_tol:
        raise SingularFlowError(
            f"system flow block singular at t={t:.6g} (det={det:.3e}): "
            "master-equation coefficients undefined at/beyond the critical "
            "time", det=det)
    inv_ii = np.linalg.inv(b_ii)
    cond = float(np.linalg.cond(b_ii))
    schur = b_ee - b_ei @ inv_ii @ b_ie
    A = (-J_S @ g @ b_ei @ inv_ii).T
    L = J_S @ g @ schur @ cov_e @ b_ie.T
    B = 0.5 * (L + L.T)
    # mean drift consistent with m'(t) = -A(t)^T m(t) + v(t)
    v = J_S @ g @ schur @ m_e
    theta = b_ie @ cov_e @ b_ie.T
    return MasterCoefficients(t=float(t), A=A, B=B, v=v,
                              theta=0.5 * (theta + theta.T),
                              picture=picture, condition_number=cond)


def master_coefficients(flow: FlowBundle, rho_e0: GaussianState,
                        picture: str = "interaction",
                        det_tol: float = 1e-12) -> list:
    """Drift/diffusion/mean-drift/thermal-covariance on the flow grid.

    Interaction picture uses the interaction-flow blocks and the rotated
    coupling G(t); the Schroedinger picture uses the full-flow blocks and
    the bare coupling G(0).  Raises SingularFlowError past the critical
    time (the determinant is attached to the error).
    """
    if picture not in ("interaction", "schrodinger"):
        raise ValueError(f"unknown picture {picture!r}")
    if rho_e0.n != flow.N:
        raise DimensionError("environment state does not match the flow")
    out = []
    d = flow.d
    for k in range(len(flow)):
        M = flow.psi[k] if picture == "interaction" else flow.phi[k]
        g = flow.g_t[k] if picture == "interaction" else flow.g_t[0]
        out.append(_coefficients_from_blocks(
            flow.times[k], g,
            M[: 2 * d, : 2 * d], M[: 2 * d, 2 * d:],
            M[2 * d:, : 2 * d], M[2 * d:, 2 * d:],
            rho_e0.cov, rho_e0.mean, picture, det_tol))
    return out


def master_coefficients_at(sys: BipartiteSystem, t: float,
                           rho_e0: GaussianState,
                           picture: str = "interaction",
                           tol: float = 1e-12) -> MasterCoefficients:
    """Coefficients at a single (possibly negative) time, from fresh flows."""
    d = sys.d
    fl = flow_at_time(sys, t, tol=max(tol, 1e-13))
    M = fl["psi"].M if picture == "interaction" else fl["phi"].M
    g = fl["g_t"] if picture == "interaction" else sys.coupling_at(0.0)
    return _coefficients_from_blocks(
        t, g, M[: 2 * d, : 2 * d], M[: 2 * d, 2 * d:],
        M[2 * d:, : 2 * d], M[2 * d:, 2 * d:],
        rho_e0.cov, rho_e0.mean, picture, det_tol=1e-300)


# ---------------------------------------------------------------------------
# critical time
# ---------------------------------------------------------------------------

def _det_function(source):
    if callable(source):
        return source
    if isinstance(source, BipartiteSystem):
        if not source.is_autonomous:
            raise ValueError(
                "critical_time needs a det(t) callable for non-autonomous "
                "systems")
        from .bipartite import _total_generator
        gen = _total_generator(source)(0.0)
        d = source.d

        def det_at(t: float) -> float:
            phi = matrix_exponential(gen, t)
            return float(np.linalg.det(phi[: 2 * d, : 2 * d]))

        return det_at, float(np.max(np.abs(gen)))
    raise TypeError("source must be a callable det(t) or a BipartiteSystem")


def critical_time(source, t_max: float, step: float | None = None,
                  rel_tol: float = 1e-10, dip_margin: float = 0.05):
    """First zero of det Phi_ii in (0, t_max], or None.

    Dense sampling followed by bisection refinement.  Emits a warning when
    |det| dips below ``dip_margin`` without changing sign (the sampling
    step may straddle a double root).
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    fn = _det_function(source)
    if isinstance(fn, tuple):
        fn, gen_norm = fn
        if step is None:
            step = min(t_max / 50.0, 0.2 / max(gen_norm, 1e-12))
    elif step is None:
        step = t_max / 2000.0

    n = max(2, int(np.ceil(t_max / step)) + 1)
    ts = np.linspace(0.0, t_max, n)
    dets = np.array([fn(t) for t in ts])

    crossing = None
    for k in range(1, n):
        if dets[k] == 0.0 or dets[k] * dets[k - 1] < 0.0:
            crossing = k
            break
    if crossing is None:
        dip = float(np.min(np.abs(dets)))
        if dip < dip_margin:
            warnings.warn(
                f"|det Phi_ii| dips to {dip:.3e} without a sign change; "
                "sampling step may be too coarse", RuntimeWarning)
        return None

    a, b = ts[crossing - 1], ts[crossing]
    fa = dets[crossing - 1]
    while (b - a) > rel_tol * max(b, rel_tol):
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if fm == 0.0:
            return float(mid)
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    return float(0.5 * (a + b))


# ---------------------------------------------------------------------------
# short-time diagnostics
# ---------------------------------------------------------------------------

def purity_rate_initial(sys: BipartiteSystem, rho_s0: GaussianState,
                        rho_e0: GaussianState) -> float:
    """Second derivative of the purity at t=0 for a pure initial system.

    ``-4 tr(Cov_S G Cov_E G^T) + tr(J_S G J_E G^T)``; the result is
    checked to be non-positive (numerical tolerance 1e-9).
    """
    if not validate(rho_s0).is_pure:
        raise InvalidStateError("initial system state must be pure")
    if not np.allclose(rho_e0.mean, 0.0, atol=1e-12):
        raise InvalidStateError("environment state must have zero mean")
    G = sys.coupling_at(0.0)
    J_S = symplectic_form(sys.d)
    J_E = symplectic_form(sys.N)
    rate = (-4.0 * float(np.trace(rho_s0.cov @ G @ rho_e0.cov @ G.T))
            + float(np.trace(J_S @ G @ J_E @ G.T)))
    if rate > 1e-9:
        raise ArithmeticError(
            f"positive initial purity rate {rate:.3e}: inputs violate the "
            "uncertainty bound")
    return rate


@dataclass(frozen=True)
class CorrelationReport:
    rate: np.ndarray
    norm: float
    correlated: bool


def correlation_rate(sys: BipartiteSystem, rho_s0: GaussianState,
                     rho_e0: GaussianState,
                     tol: float = 1e-12) -> CorrelationReport:
    """Initial growth rate of the system-environment cross term.

    ``C'(0) = Gamma_S^{-1} J_S G - G J_E Gamma_E^{-1}``; a nonzero rate
    signals immediate correlation between system and environment.
    """
    G = sys.coupling_at(0.0)
    J_S = symplectic_form(sys.d)
    J_E = symplectic_form(sys.N)
    gamma_e_inv = np.linalg.inv(rho_e0.cov)
    rate = (np.linalg.solve(rho_s0.cov, J_S @ G)
            - G @ J_E @ gamma_e_inv)
    norm = float(np.linalg.norm(rate))
    return CorrelationReport(rate=rate, norm=norm, correlated=norm > tol)


def information_loss_form(flow: PhaseSpaceFlow, gamma_s: np.ndarray,
                          gamma_e: np.ndarray, zeta: np.ndarray) -> float:
    """Quadratic form tracking which part of the initial data survives.

    Evaluates Gamma_S on the system-pulled-back direction plus Gamma_E on
    the environment-pulled-back direction; directions in ker Phi_ii^T lose
    their system contribution at the critical time.
    """
    a = flow.ii.T @ zeta
    b = flow.ei.T @ zeta
    return float(a @ gamma_s @ a + b @ gamma_e @ b)


# ---------------------------------------------------------------------------
# grid-based Wigner propagation
# ---------------------------------------------------------------------------

def _check_axes(w0, axes):
    if w0.ndim != len(axes):
        raise DimensionError("number of axes must match sample array rank")
    dz = []
    for ax, n in zip(axes, w0.shape):
        ax = np.asarray(ax, dtype=float)
        if ax.ndim != 1 or len(ax) != n:
            raise DimensionError("axis length does not match samples")
        d = np.diff(ax)
        if len(d) < 1 or not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
            raise ValueError("axes must be uniform grids")
        dz.append(float(d[0]))
    return dz


def _boundary_max(arr: np.ndarray) -> float:
    out = 0.0
    for axis in range(arr.ndim):
        sl = [slice(None)] * arr.ndim
        for edge in (0, -1):
            sl[axis] = edge
            out = max(out, float(np.max(np.abs(arr[tuple(sl)]))))
    return out


def _pullback_spectrum_czt(w0, axes, freq_axes, P):
    """Exact evaluation of ``dz Sum_j w0[j] exp(-i (P zeta_m).z_j)``.

    The sample sum is a trigonometric polynomial in zeta, so it can be
    evaluated exactly on the sheared lattice ``P zeta_m``: fix the second
    output index, fold its contribution into phase factors, and run
    chirp-z transforms along each axis (frequency steps ``P[a,b] d_zeta``
    need not divide the FFT grid).
    """
    from scipy.signal import czt

    x, p = (np.asarray(a, dtype=float) for a in axes)
    z1, z2 = freq_axes
    n1, n2 = len(x), len(p)
    dx, dp = x[1] - x[0], p[1] - p[0]
    dz1, dz2 = z1[1] - z1[0], z2[1] - z2[0]

    out = np.empty((n1, n2), dtype=complex)
    # frequencies seen along j1: P00 zeta1 + P01 zeta2 (and j2: P10/P11)
    nu = P[0, 0] * z1
    mu = P[1, 0] * z1
    w1 = np.exp(-1j * dx * P[0, 0] * dz1)
    a1 = np.exp(1j * dx * P[0, 0] * z1[0])
    w2 = np.exp(-1j * dp * P[1, 0] * dz1)
    a2 = np.exp(1j * dp * P[1, 0] * z1[0])
    phase1 = np.exp(-1j * x[0] * nu)
    phase2 = np.exp(-1j * p[0] * mu)
    idx = np.arange(n1)
    for m2 in range(n2):
        off = np.exp(-1j * (P[0, 1] * z2[m2]) * x)[:, None] \
            * np.exp(-1j * (P[1, 1] * z2[m2]) * p)[None, :]
        A = w0 * off
        B = czt(A, m=n1, w=w1, a=a1, axis=0) * phase1[:, None]
        C = czt(B, m=n1, w=w2, a=a2, axis=1) * phase2[None, :]
        out[:, m2] = C[idx, idx]
    return out * (dx * dp)


def reduced_wigner_grid(flow: PhaseSpaceFlow, w0: np.ndarray, axes,
                        rho_e0: GaussianState,
                        decay_tol: float = 1e-8) -> np.ndarray:
    """Propagate sampled reduced Wigner data to the flow's time.

    Pipeline: pull the frequency argument of the sampled spectrum back
    through Phi_ii^T, multiply by the Gaussian damping factor from the
    accumulated thermal covariance, inverse FFT.  Works for singular
    Phi_ii or degenerate damping (the product is formed in the frequency
    domain).  Axes are ordered (positions..., momenta...).  d = 1 uses an
    exact chirp-z pullback; d = 2 falls back to multilinear interpolation
    of the FFT spectrum (second-order accurate in the frequency step).
    """
    w0 = np.asarray(w0, dtype=float)
    d = flow.d
    if w0.ndim != 2 * d:
        raise DimensionError(
            f"expected a {2 * d}-d sample grid for d={d}, got rank {w0.ndim}")
    if d > 2:
        raise DimensionError("grid propagation supports d <= 2")
    dz = _check_axes(w0, axes)
    peak = float(np.max(np.abs(w0)))
    if peak == 0.0:
        return np.zeros_like(w0)
    if _boundary_max(w0) > decay_tol * peak:
        raise GridResolutionError(
            "samples do not decay at the grid boundary; enlarge the grid")

    theta = flow.ie @ rho_e0.cov @ flow.ie.T
    phi_ii = flow.ii

    freq_axes = [np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(n, dd))
                 for n, dd in zip(w0.shape, dz)]
    z0 = np.array([float(np.asarray(ax)[0]) for ax in axes])

    F = np.fft.fftshift(np.fft.fftn(w0))
    mesh = np.meshgrid(*freq_axes, indexing="ij")
    zeta = np.stack([m.ravel() for m in mesh], axis=1)
    dz_prod = float(np.prod(dz))
    Fc = F.ravel() * dz_prod * np.exp(-1j * (zeta @ z0))

    # Nyquist/band-limit check: the spectrum must have decayed before the
    # boundary, otherwise the pullback by Phi_ii^T aliases
    Fc_grid = Fc.reshape(w0.shape)
    fmax = float(np.max(np.abs(Fc_grid)))
    if _boundary_max(Fc_grid) > max(decay_tol, 1e-12) * fmax * 10.0:
        raise GridResolutionError(
            "spectrum not resolved at the frequency boundary; refine the "
            f"grid (spectral radius of Phi_ii: "
            f"{float(np.max(np.abs(np.linalg.eigvals(phi_ii)))):.3g})")

    if d == 1:
        sampled = _pullback_spectrum_czt(w0, axes, freq_axes,
                                         phi_ii.T).ravel()
    else:
        pulled = zeta @ phi_ii  # rows are Phi_ii^T zeta
        coords = np.empty_like(pulled)
        for k, fax in enumerate(freq_axes):
            coords[:, k] = (pulled[:, k] - fax[0]) / (fax[1] - fax[0])
        sampled = sample_fractional(Fc_grid, coords)

    damping = np.exp(-0.5 * np.einsum("ij,jk,ik->i", zeta, theta, zeta))
    out_freq = sampled * damping * np.exp(1j * (zeta @ z0))
    out = np.fft.ifftn(np.fft.ifftshift(out_freq.reshape(w0.shape)))
    return np.real(out) / dz_prod
