import numpy as np
import pytest
from conftest import random_covariance, random_state

from gaussflow.bipartite import (
    BipartiteSystem,
    QuadraticHamiltonian,
    flow_at_time,
    full_flow,
)
from gaussflow.exceptions import (
    DimensionError,
    GridResolutionError,
    InvalidStateError,
    SingularFlowError,
)
from gaussflow.models import (
    TwoOscillatorParams,
    two_oscillator_det_ii,
    two_oscillator_system,
)
from gaussflow.reduced import (
    correlation_rate,
    critical_time,
    evolve_reduced,
    information_loss_form,
    linear_entropy_curve,
    master_coefficients,
    master_coefficients_at,
    purity_rate_initial,
    reduced_wigner_grid,
)
from gaussflow.states import (
    GaussianState,
    squeezed,
    thermal_mode,
    vacuum,
    wigner_eval,
)


def osc_system(gamma=0.5, omega_e_sq=1.0):
    return two_oscillator_system(
        TwoOscillatorParams(1.0, omega_e_sq, gamma))


def test_evolve_reduced_initial_point():
    sys = osc_system()
    flow = full_flow(sys, np.linspace(0.0, 2.0, 9))
    traj = evolve_reduced(flow, squeezed(0.3), thermal_mode(0.5))
    assert np.allclose(traj.cov[0], squeezed(0.3).cov, atol=1e-14)
    assert traj.purity[0] == pytest.approx(1.0, abs=1e-12)
    assert traj.det_phi_ii[0] == pytest.approx(1.0)
    assert len(traj) == 9


def test_evolve_reduced_decoupled_purity_constant():
    sys = osc_system(gamma=0.0)
    flow = full_flow(sys, np.linspace(0.0, 10.0, 101))
    traj = evolve_reduced(flow, vacuum(1), thermal_mode(0.4))
    assert np.max(np.abs(traj.purity - 1.0)) < 1e-12
    assert np.max(traj.linear_entropy) < 1e-12


def test_evolve_reduced_matches_full_partial_trace(rng):
    sys = osc_system(gamma=0.7)
    ts = np.linspace(0.0, 5.0, 26)
    flow = full_flow(sys, ts)
    rho_s = random_state(1, rng, displaced=True)
    rho_e = random_state(1, rng, displaced=True)
    traj = evolve_reduced(flow, rho_s, rho_e)
    total0 = np.zeros((4, 4))
    total0[:2, :2] = rho_s.cov
    total0[2:, 2:] = rho_e.cov
    m0 = np.concatenate([rho_s.mean, rho_e.mean])
    for k in (5, 13, 25):
        phi = flow.phi[k]
        tot = phi @ total0 @ phi.T
        assert np.max(np.abs(traj.cov[k] - tot[:2, :2])) < 1e-10
        assert np.max(np.abs(traj.mean[k] - (phi @ m0)[:2])) < 1e-10
    assert np.min(traj.min_symplectic_eigenvalue) >= 0.5 - 1e-8


def test_evolve_reduced_guards(rng):
    sys = osc_system()
    flow = full_flow(sys, np.linspace(0.0, 1.0, 3))
    with pytest.raises(DimensionError):
        evolve_reduced(flow, vacuum(2), vacuum(1))
    bad = GaussianState(1, np.zeros(2), 0.3 * np.eye(2))
    with pytest.raises(InvalidStateError):
        evolve_reduced(flow, bad, vacuum(1))


def test_linear_entropy_curve():
    sys = osc_system()
    flow = full_flow(sys, np.linspace(0.0, 3.0, 16))
    traj = evolve_reduced(flow, vacuum(1), thermal_mode(0.5))
    assert np.allclose(linear_entropy_curve(traj), 1.0 - traj.purity,
                       atol=1e-14)


def test_master_coefficients_initial_values(rng):
    sys = osc_system()
    flow = full_flow(sys, np.linspace(0.0, 1.0, 5))
    coeffs = master_coefficients(flow, thermal_mode(0.5))
    c0 = coeffs[0]
    assert np.allclose(c0.A, 0.0, atol=1e-12)
    assert np.allclose(c0.B, 0.0, atol=1e-12)
    assert np.allclose(c0.v, 0.0, atol=1e-12)
    assert np.allclose(c0.theta, 0.0, atol=1e-12)
    assert c0.picture == "interaction"


def test_master_coefficients_moment_consistency(rng):
    # RK4-integrate the moment ODEs with the computed coefficients and
    # compare against the closed-form transported moments
    G = 0.3 * rng.normal(size=(2, 2))
    sys = BipartiteSystem(QuadraticHamiltonian(1, np.diag([1.0, 1.0])),
                          QuadraticHamiltonian(1, np.diag([0.8, 1.0])), G)
    rho_e = GaussianState(1, np.array([0.3, -0.2]), thermal_mode(0.5).cov)
    rho_s = GaussianState(1, np.array([0.5, 0.1]), squeezed(0.2).cov)
    n = 1500
    ts = np.linspace(0.0, 3.0, n + 1)
    fl = full_flow(sys, ts)
    coeffs = master_coefficients(fl, rho_e)
    mu_exact = (fl.psi_ii @ rho_s.cov @ fl.psi_ii.transpose(0, 2, 1)
                + fl.psi_ie @ rho_e.cov @ fl.psi_ie.transpose(0, 2, 1))
    m_exact = fl.psi_ii @ rho_s.mean + fl.psi_ie @ rho_e.mean
    A = np.array([c.A for c in coeffs])
    B = np.array([c.B for c in coeffs])
    v = np.array([c.v for c in coeffs])
    M, m = rho_s.cov.copy(), rho_s.mean.copy()
    dt = ts[1] - ts[0]
    fM = lambda Mv, Ak, Bk: 2 * Bk - (Ak.T @ Mv + Mv @ Ak)
    fm = lambda mv, Ak, vk: -Ak.T @ mv + vk
    err = 0.0
    for k in range(n):
        Am, Bm, vm = (0.5 * (A[k] + A[k + 1]), 0.5 * (B[k] + B[k + 1]),
                      0.5 * (v[k] + v[k + 1]))
        k1, l1 = fM(M, A[k], B[k]), fm(m, A[k], v[k])
        k2, l2 = fM(M + dt / 2 * k1, Am, Bm), fm(m + dt / 2 * l1, Am, vm)
        k3, l3 = fM(M + dt / 2 * k2, Am, Bm), fm(m + dt / 2 * l2, Am, vm)
        k4, l4 = (fM(M + dt * k3, A[k + 1], B[k + 1]),
                  fm(m + dt * l3, A[k + 1], v[k + 1]))
        M = M + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        m = m + dt / 6 * (l1 + 2 * l2 + 2 * l3 + l4)
        err = max(err, np.max(np.abs(M - mu_exact[k + 1])),
                  np.max(np.abs(m - m_exact[k + 1])))
    assert err < 1e-6


def test_schrodinger_picture_moments(rng):
    # full-dynamics mean obeys m' = (J_S Hs - A^T) m + v with the
    # Schrodinger-picture coefficients
    from gaussflow.symplectic import symplectic_form
    sys = osc_system(gamma=0.4)
    rho_e = GaussianState(1, np.array([0.4, 0.1]), thermal_mode(0.6).cov)
    m0 = np.array([1.0, -0.3])
    t, h = 1.1, 1e-5
    J_S = symplectic_form(1)
    Hs = sys.system.hessian_at(0.0)
    c = master_coefficients_at(sys, t, rho_e, picture="schrodinger")
    mean_at = lambda s: (flow_at_time(sys, s)["phi"].ii @ m0
                         + flow_at_time(sys, s)["phi"].ie @ rho_e.mean)
    deriv = (mean_at(t + h) - mean_at(t - h)) / (2 * h)
    model = (J_S @ Hs - c.A.T) @ mean_at(t) + c.v
    assert np.max(np.abs(deriv - model)) < 1e-7


def test_master_coefficients_singular_past_critical_time():
    p = TwoOscillatorParams(1.0, 1.0, 0.5)
    sys = two_oscillator_system(p)
    t_c = critical_time(sys, 10.0)
    assert t_c is not None
    flow = full_flow(sys, np.linspace(0.0, t_c, 201))
    with pytest.raises(SingularFlowError) as exc_info:
        master_coefficients(flow, thermal_mode(0.5), det_tol=1e-6)
    assert abs(exc_info.value.det) < 1e-6


def test_critical_time_callable_vs_system():
    p = TwoOscillatorParams(1.0, 1.0, 0.5)
    sys = two_oscillator_system(p)
    t_sys = critical_time(sys, 10.0)
    t_det = critical_time(lambda t: two_oscillator_det_ii(p, t), 10.0,
                          step=0.01)
    assert t_sys == pytest.approx(t_det, rel=1e-8)
    assert two_oscillator_det_ii(p, t_det) == pytest.approx(0.0, abs=1e-8)


def test_critical_time_none_for_decoupled():
    sys = osc_system(gamma=0.0)
    assert critical_time(sys, 20.0) is None


def test_critical_time_dip_warning():
    det = lambda t: (np.cos(t)) ** 2 + 0.01
    with pytest.warns(RuntimeWarning):
        out = critical_time(det, 5.0, step=0.01)
    assert out is None


def test_critical_time_guards():
    with pytest.raises(ValueError):
        critical_time(lambda t: 1.0, 0.0)
    with pytest.raises(TypeError):
        critical_time(42, 1.0)


def test_purity_rate_two_oscillator():
    # position-position coupling, vacuum states: -4 * gamma^2 * 1/4
    sys = osc_system(gamma=0.5)
    rate = purity_rate_initial(sys, vacuum(1), vacuum(1))
    assert rate == pytest.approx(-0.25, abs=1e-12)


def test_purity_rate_matches_finite_difference():
    sys = osc_system(gamma=0.5)
    rate = purity_rate_initial(sys, vacuum(1), thermal_mode(0.5))

    def purity_at(t):
        fl = flow_at_time(sys, t)["phi"]
        cov = (fl.ii @ vacuum(1).cov @ fl.ii.T
               + fl.ie @ thermal_mode(0.5).cov @ fl.ie.T)
        return 0.5 / np.sqrt(np.linalg.det(cov))

    h = 1e-3
    fd = (purity_at(h) - 2.0 * purity_at(0.0) + purity_at(-h)) / h ** 2
    assert fd == pytest.approx(rate, abs=1e-4)


def test_purity_rate_guards():
    sys = osc_system()
    with pytest.raises(InvalidStateError):
        purity_rate_initial(sys, thermal_mode(0.5), vacuum(1))
    displaced_env = GaussianState(1, np.array([1.0, 0.0]), vacuum(1).cov)
    with pytest.raises(InvalidStateError):
        purity_rate_initial(sys, vacuum(1), displaced_env)


def test_correlation_rate_values():
    sys = osc_system(gamma=0.5)
    rep = correlation_rate(sys, vacuum(1), vacuum(1))
    # Gamma = I/2 on both sides: rate = 2(J_S G - G J_E)
    expected = 2.0 * np.array([[0.0, -0.5], [-0.5, 0.0]])
    assert np.allclose(rep.rate, expected, atol=1e-12)
    assert rep.correlated
    decoupled = correlation_rate(osc_system(gamma=0.0), vacuum(1),
                                 vacuum(1))
    assert decoupled.norm == pytest.approx(0.0, abs=1e-14)
    assert not decoupled.correlated


def test_information_loss_form(rng):
    sys = osc_system()
    fl = flow_at_time(sys, 0.0)["phi"]
    gamma_s = random_covariance(1, rng)
    gamma_e = random_covariance(1, rng)
    zeta = rng.normal(size=2)
    # at t = 0 only the system term contributes
    assert information_loss_form(fl, gamma_s, gamma_e, zeta) == \
        pytest.approx(zeta @ gamma_s @ zeta, abs=1e-12)


def test_wigner_grid_matches_analytic():
    sys = osc_system(gamma=0.6)
    fl = flow_at_time(sys, 1.1)["phi"]
    rho_s, rho_e = squeezed(0.2), thermal_mode(0.5)
    ax = np.linspace(-8.0, 8.0, 128)
    X, P = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X, P], axis=-1)
    w0 = wigner_eval(rho_s, pts)
    wt = reduced_wigner_grid(fl, w0, (ax, ax), rho_e)
    cov_t = fl.ii @ rho_s.cov @ fl.ii.T + fl.ie @ rho_e.cov @ fl.ie.T
    exact = wigner_eval(GaussianState(1, np.zeros(2), cov_t), pts)
    assert np.max(np.abs(wt - exact)) < 1e-8 * np.max(np.abs(exact))


def test_wigner_grid_guards():
    sys = osc_system()
    fl = flow_at_time(sys, 0.5)["phi"]
    ax = np.linspace(-2.0, 2.0, 32)  # far too small: no boundary decay
    X, P = np.meshgrid(ax, ax, indexing="ij")
    w0 = wigner_eval(vacuum(1), np.stack([X, P], axis=-1))
    with pytest.raises(GridResolutionError):
        reduced_wigner_grid(fl, w0, (ax, ax), vacuum(1))
    with pytest.raises(DimensionError):
        reduced_wigner_grid(fl, w0[0], (ax,), vacuum(1))
    bad_ax = np.concatenate([ax[:16], ax[16:] * 2.0])
    with pytest.raises(ValueError):
        reduced_wigner_grid(fl, w0, (ax, bad_ax), vacuum(1))


def test_wigner_grid_zero_input():
    sys = osc_system()
    fl = flow_at_time(sys, 0.5)["phi"]
    ax = np.linspace(-4.0, 4.0, 16)
    out = reduced_wigner_grid(fl, np.zeros((16, 16)), (ax, ax), vacuum(1))
    assert not out.any()
