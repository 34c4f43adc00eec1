"""Phase-space toolkit for Gaussian open quantum systems.

Exact reduced Gaussian dynamics for quadratic Hamiltonians with bilinear
system-environment coupling, time-dependent master-equation coefficients,
purity/entropy diagnostics, critical times, and analytic reference models.
"""

__version__ = "0.1.0"

from .bipartite import (
    BipartiteSystem,
    FlowBundle,
    QuadraticHamiltonian,
    flow_at_time,
    full_flow,
    total_hessian,
)
from .models import (
    QBMParams,
    TwoOscillatorParams,
    qbm_build,
    qbm_kernel,
    qbm_residual,
    two_oscillator_det_ii,
    two_oscillator_flow,
    two_oscillator_system,
)
from .reduced import (
    MasterCoefficients,
    ReducedTrajectory,
    correlation_rate,
    critical_time,
    evolve_reduced,
    master_coefficients,
    master_coefficients_at,
    purity_rate_initial,
    reduced_wigner_grid,
)
from .states import (
    GaussianState,
    ValidityReport,
    linear_entropy,
    purity,
    squeezed,
    thermal_mode,
    thermal_state,
    vacuum,
    validate,
    von_neumann_entropy,
    wigner_eval,
)
from .symplectic import (
    PhaseSpaceFlow,
    SymplecticForm,
    integrate_flow,
    matrix_exponential,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
)

__all__ = [
    "__version__",
    "BipartiteSystem", "FlowBundle", "QuadraticHamiltonian",
    "flow_at_time", "full_flow", "total_hessian",
    "QBMParams", "TwoOscillatorParams", "qbm_build", "qbm_kernel",
    "qbm_residual", "two_oscillator_det_ii", "two_oscillator_flow",
    "two_oscillator_system",
    "MasterCoefficients", "ReducedTrajectory", "correlation_rate",
    "critical_time", "evolve_reduced", "master_coefficients",
    "master_coefficients_at", "purity_rate_initial", "reduced_wigner_grid",
    "GaussianState", "ValidityReport", "linear_entropy", "purity",
    "squeezed", "thermal_mode", "thermal_state", "vacuum", "validate",
    "von_neumann_entropy", "wigner_eval",
    "PhaseSpaceFlow", "SymplecticForm", "integrate_flow",
    "matrix_exponential", "symplectic_eigenvalues", "symplectic_form",
    "williamson",
]
