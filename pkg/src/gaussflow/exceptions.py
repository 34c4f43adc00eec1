"""Exception types raised across the library."""


class GaussflowError(Exception):
    """Base class for library errors."""


class DimensionError(GaussflowError, ValueError):
    """Inconsistent or unsupported array dimensions."""


class NotSymmetricError(GaussflowError, ValueError):
    """A matrix required to be symmetric is not."""


class NotPositiveDefiniteError(GaussflowError, ValueError):
    """A matrix required to be positive-definite is not."""


class InvalidStateError(GaussflowError, ValueError):
    """A Gaussian state violates the quantum validity bound."""


class SingularFlowError(GaussflowError, ArithmeticError):
    """The system block of the flow is (numerically) singular at/beyond t_c."""

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class StepSizeUnderflowError(GaussflowError, ArithmeticError):
    """The adaptive integrator could not meet the tolerance (stiff generator)."""


class GridResolutionError(GaussflowError, ValueError):
    """A phase-space grid is too coarse or does not contain the state."""
