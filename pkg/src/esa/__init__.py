"""Optimal adaptive and non-adaptive approximation of stationary processes
under a quadratic energy penalty."""

__version__ = "0.1.0"

from .energy import EnergyFactor, causal_inverse, factor_energy, kinetic_beta
from .errors import (
    CausalityViolationError,
    DegenerateEnergyError,
    EsaError,
    FactorizationError,
    InsufficientDataError,
    InvalidModelError,
    NumericalError,
    PerfectPredictionError,
    ResolutionError,
    UnsupportedBoundaryError,
    UnsupportedError,
    UnsupportedMultiplicityError,
)
from .filters import CausalTaps, ExponentialFilter, TwoSidedTaps, causal_taps, nonadaptive_taps, ou_causal_kernel
from .outer import KappaConstant, OuterFactor, kappa, outer_factor_circle
from .simulate import monte_carlo, ou_discretization_study
from .solver import (
    AdaptiveSolution,
    ErrorTriple,
    closed_form_errors,
    solve_adaptive_circle,
    solve_nonadaptive,
    tradeoff_sweep,
)
from .spectral import Domain, EnergyPolynomial, FrequencyGrid, GridFunction, SpectralModel

__all__ = [name for name in dir() if not name.startswith("_")]
