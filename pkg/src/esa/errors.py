"""Exception hierarchy.

Validation-type failures subclass :class:`ValueError`; numerical failures
subclass :class:`NumericalError`.  The CLI maps the former to exit code 2 and
the latter to exit code 3.
"""


class EsaError(Exception):
    """Base class for all package errors."""


class InvalidModelError(EsaError, ValueError):
    """A spectral model or energy polynomial violates its invariants."""


class UnsupportedError(EsaError, ValueError):
    """The request is well formed but outside what is implemented."""


class UnsupportedBoundaryError(UnsupportedError):
    """MA(1) with |rho| = 1, which has no closed-form treatment."""


class UnsupportedMultiplicityError(UnsupportedError):
    """Repeated energy roots; partial fractions need distinct roots."""


class NumericalError(EsaError, ArithmeticError):
    """Base class for numerical failures."""


class FactorizationError(NumericalError):
    """Root finding did not reach the residual target."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateEnergyError(NumericalError):
    """An energy root landed on the unit circle (or the real axis)."""


class ResolutionError(NumericalError):
    """The frequency grid cannot resolve the cepstrum."""


class CausalityViolationError(NumericalError):
    """A nominally causal filter has significant anticausal content."""


class InsufficientDataError(NumericalError):
    """Too few usable samples for batch-means estimation."""


class PerfectPredictionError(EsaError):
    """The Kolmogorov integral diverges to -inf.

    Not a failure as such: callers catch it and report a zero adaptivity
    error.
    """
