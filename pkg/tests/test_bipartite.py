import numpy as np
import pytest
from conftest import random_covariance

from gaussflow.bipartite import (
    BipartiteSystem,
    QuadraticHamiltonian,
    flow_at_time,
    full_flow,
    interaction_generator,
    total_hessian,
)
from gaussflow.exceptions import DimensionError
from gaussflow.symplectic import matrix_exponential, symplectic_form


def make_system(d=1, N=2, rng=None, coupling_scale=0.3):
    hs = np.diag(rng.uniform(0.5, 2.0, size=2 * d))
    he = np.diag(rng.uniform(0.5, 2.0, size=2 * N))
    G = coupling_scale * rng.normal(size=(2 * d, 2 * N))
    return BipartiteSystem(QuadraticHamiltonian(d, hs),
                           QuadraticHamiltonian(N, he), G)


def test_hamiltonian_guards():
    with pytest.raises(DimensionError):
        QuadraticHamiltonian(2, np.eye(2)).hessian_at(0.0)
    h = QuadraticHamiltonian(1, np.diag([2.0, 1.0]))
    assert h.is_autonomous
    assert np.allclose(h.generator_at(0.0),
                       symplectic_form(1) @ np.diag([2.0, 1.0]))


def test_total_hessian_layout(rng):
    sys = make_system(1, 2, rng)
    H = total_hessian(sys)
    assert np.allclose(H[:2, :2], sys.system.hessian_at(0.0))
    assert np.allclose(H[2:, 2:], sys.environment.hessian_at(0.0))
    assert np.allclose(H[:2, 2:], sys.coupling_at(0.0))
    assert np.allclose(H, H.T)


def test_coupling_shape_guard(rng):
    sys = BipartiteSystem(QuadraticHamiltonian(1, np.eye(2)),
                          QuadraticHamiltonian(2, np.eye(4)),
                          np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        sys.coupling_at(0.0)


def test_full_flow_grid_validation(rng):
    sys = make_system(1, 1, rng)
    with pytest.raises(ValueError):
        full_flow(sys, [1.0, 2.0])  # must start at 0
    with pytest.raises(ValueError):
        full_flow(sys, [0.0, 1.0, 0.5])


def test_full_flow_autonomous_matches_expm(rng):
    sys = make_system(1, 2, rng)
    ts = np.linspace(0.0, 4.0, 17)
    bundle = full_flow(sys, ts)
    gen = np.zeros((6, 6))
    J = np.zeros((6, 6))
    J[:2, :2] = symplectic_form(1)
    J[2:, 2:] = symplectic_form(2)
    gen = J @ total_hessian(sys)
    for k in (3, 9, 16):
        assert np.max(np.abs(bundle.phi[k]
                             - matrix_exponential(gen, ts[k]))) < 1e-11
    assert bundle.max_symplectic_defect < 1e-10


def test_interaction_flow_properties(rng):
    sys = make_system(1, 1, rng)
    ts = np.linspace(0.0, 3.0, 13)
    bundle = full_flow(sys, ts)
    assert np.allclose(bundle.psi[0], np.eye(4), atol=1e-14)
    assert np.allclose(bundle.g_t[0], sys.coupling_at(0.0), atol=1e-14)
    # psi = phi0^{-1} phi with block-diagonal free flow
    k = 7
    phi0 = np.zeros((4, 4))
    phi0[:2, :2] = bundle.phi_s[k]
    phi0[2:, 2:] = bundle.phi_e[k]
    assert np.max(np.abs(phi0 @ bundle.psi[k] - bundle.phi[k])) < 1e-10
    fl = bundle.interaction_flow_at(k)
    assert fl.symplectic_defect() < 1e-10


def test_flow_at_time_negative(rng):
    sys = make_system(1, 1, rng)
    fwd = flow_at_time(sys, 0.8)["phi"].M
    bwd = flow_at_time(sys, -0.8)["phi"].M
    assert np.max(np.abs(fwd @ bwd - np.eye(4))) < 1e-11


def test_flow_at_time_nonautonomous(rng):
    G = lambda t: np.array([[0.4 * np.cos(t), 0.0], [0.0, 0.0]])
    sys = BipartiteSystem(QuadraticHamiltonian(1, np.eye(2)),
                          QuadraticHamiltonian(1, np.eye(2)), G)
    assert not sys.is_autonomous
    with pytest.raises(ValueError):
        flow_at_time(sys, -1.0)
    out = flow_at_time(sys, 1.5, tol=1e-11)
    # cross-check against a fine grid of cumulative steps
    ts = np.linspace(0.0, 1.5, 151)
    bundle = full_flow(sys, ts, tol=1e-11)
    assert np.max(np.abs(out["phi"].M - bundle.phi[-1])) < 1e-8


def test_partial_trace_subblock(rng):
    # reduced covariance transport equals the sub-block of the full one
    for _ in range(5):
        sys = make_system(2, 3, rng)
        cov_s = random_covariance(2, rng)
        cov_e = random_covariance(3, rng)
        total0 = np.zeros((10, 10))
        total0[:4, :4] = cov_s
        total0[4:, 4:] = cov_e
        phi = flow_at_time(sys, 1.7)["phi"]
        total_t = phi.M @ total0 @ phi.M.T
        reduced = (phi.ii @ cov_s @ phi.ii.T + phi.ie @ cov_e @ phi.ie.T)
        assert np.max(np.abs(total_t[:4, :4] - reduced)) < 1e-10


def test_interaction_generator_structure(rng):
    sys = make_system(1, 1, rng)
    K = interaction_generator(sys, 0.0)
    hess = np.zeros((4, 4))
    hess[:2, 2:] = sys.coupling_at(0.0)
    hess[2:, :2] = sys.coupling_at(0.0).T
    J = np.zeros((4, 4))
    J[:2, :2] = symplectic_form(1)
    J[2:, 2:] = symplectic_form(1)
    assert np.allclose(K, J @ hess, atol=1e-12)


def test_zero_mode_environment():
    # N = 0: system evolves freely, all environment blocks are empty
    sys = BipartiteSystem(QuadraticHamiltonian(1, np.diag([1.0, 1.0])),
                          QuadraticHamiltonian(0, np.zeros((0, 0))),
                          np.zeros((2, 0)))
    bundle = full_flow(sys, np.linspace(0.0, 1.0, 5))
    gen = symplectic_form(1) @ np.diag([1.0, 1.0])
    assert np.max(np.abs(bundle.phi[-1]
                         - matrix_exponential(gen, 1.0))) < 1e-12
    assert bundle.phi_ie.shape == (5, 2, 0)
