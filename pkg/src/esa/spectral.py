"""Spectral densities, energy polynomials and frequency grids.

Circle quantities live on ``T = [-pi, pi)`` with Lebesgue measure ``du``;
integrals there use the rectangle rule on a uniform periodic grid, which is
exact for trigonometric polynomials up to degree ``N - 1``.  Line quantities
(only the Ornstein-Uhlenbeck model) use adaptive quadrature after a tangent
substitution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidModelError, UnsupportedBoundaryError, UnsupportedError

F_FLOOR = 1e-300
MINUS_INF_THRESHOLD = -1e6
DEFAULT_GRID_SIZE = 8192


class Domain(enum.Enum):
    CIRCLE = "circle"
    LINE = "line"


# ---------------------------------------------------------------------------
# Energy polynomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyPolynomial:
    """Polynomial ``l(z) = sum_m coeffs[m] * z**m``.

    Trailing zero coefficients are dropped so that the leading coefficient is
    nonzero; the zero polynomial is stored as ``(0,)``.
    """

    coeffs: tuple

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        if not c:
            c = [0j]
        if not all(np.isfinite(x) for x in c):
            raise InvalidModelError("energy coefficients must be finite")
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def kinetic(cls, alpha: float, domain: Domain) -> "EnergyPolynomial":
        """``alpha * (z - 1)`` on the circle, ``alpha * z`` on the line."""
        if domain is Domain.CIRCLE:
            return cls((-alpha, alpha))
        return cls((0.0, alpha))

    @classmethod
    def zero(cls) -> "EnergyPolynomial":
        return cls((0.0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def kinetic_alpha(self, domain: Domain) -> float | None:
        """Return alpha if this is the kinetic form for ``domain``."""
        c = self.coeffs
        if len(c) != 2:
            return None
        a = c[1]
        if a.imag != 0 or a.real <= 0:
            return None
        if domain is Domain.CIRCLE and c[0] == -a:
            return a.real
        if domain is Domain.LINE and c[0] == 0:
            return a.real
        return None

    def __call__(self, z):
        return np.polyval(np.array(self.coeffs[::-1]), z)

    def symbol(self, u, domain: Domain):
        u = np.asarray(u, dtype=float)
        if domain is Domain.CIRCLE:
            return self(np.exp(1j * u))
        return self(1j * u)

    def to_json(self):
        return [[c.real, c.imag] for c in self.coeffs]


def eval_energy_symbol(ell: EnergyPolynomial, domain: Domain, u):
    """``l(e^{iu})`` on the circle, ``l(iu)`` on the line."""
    return ell.symbol(u, domain)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyGrid:
    N: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        n = int(self.N)
        if n < 16 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 16, got {self.N}")
        object.__setattr__(self, "N", n)

    @property
    def points(self) -> np.ndarray:
        return -np.pi + 2 * np.pi * np.arange(self.N) / self.N

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.N

    def integrate(self, values) -> complex | float:
        """Rectangle rule over one period."""
        return 2 * np.pi * np.mean(values)

    def frequencies(self) -> np.ndarray:
        """Integer frequency ``tau`` of each slot returned by :func:`fourier_coeffs`."""
        return np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.N,):
            raise ValueError("values must have one entry per grid point")
        object.__setattr__(self, "values", v)

    def coeffs(self) -> np.ndarray:
        return fourier_coeffs(self.values)

    def norm2(self) -> float:
        """Squared L2 norm with respect to Lebesgue measure on T."""
        return float(self.grid.integrate(np.abs(self.values) ** 2))


def fourier_coeffs(values) -> np.ndarray:
    """Coefficients ``d[tau]`` of ``sum_tau d[tau] e^{i tau u}`` in FFT order.

    The grid starts at ``-pi`` so every coefficient picks up ``(-1)**tau``;
    with ``N`` even this sign is consistent for aliased indices.
    """
    values = np.asarray(values)
    n = values.shape[-1]
    sign = 1 - 2 * (np.arange(n) % 2)
    return sign * np.fft.fft(values) / n


def from_fourier(coeffs) -> np.ndarray:
    """Inverse of :func:`fourier_coeffs`."""
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    sign = 1 - 2 * (np.arange(n) % 2)
    return np.fft.ifft(sign * coeffs) * n


# ---------------------------------------------------------------------------
# Spectral models
# ---------------------------------------------------------------------------

FORMS = ("white", "ar1", "ma1", "ou", "tabulated")


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Parametric or tabulated spectral density.

    Densities are with respect to ``du`` so that ``K_B(0) = int f(u) du``.
    White noise, AR(1) and MA(1) live on the circle; the Ornstein-Uhlenbeck
    process (``K_B(t) = exp(-|t|/2)``) lives on the line.  Tabulated densities
    are piecewise constant on the cells of a uniform circle grid.
    """

    form: str
    domain: Domain = Domain.CIRCLE
    sigma: float = 1.0
    rho: complex = 0j
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.form not in FORMS:
            raise InvalidModelError(f"unknown model form {self.form!r}")
        object.__setattr__(self, "rho", complex(self.rho))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.form == "ou":
            if self.domain is not Domain.LINE:
                raise InvalidModelError("the OU model lives on the line")
        elif self.domain is not Domain.CIRCLE:
            raise InvalidModelError(f"{self.form} models live on the circle")
        if self.form in ("white", "ar1", "ma1"):
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise InvalidModelError("sigma must be positive")
        if not np.isfinite(self.rho):
            raise InvalidModelError("rho must be finite")
        if self.form == "ar1" and abs(self.rho) >= 1:
            raise InvalidModelError("AR(1) requires |rho| < 1")
        if self.form == "ma1" and abs(abs(self.rho) - 1) < 1e-12:
            raise UnsupportedBoundaryError("MA(1) with |rho| = 1 is not supported")
        if self.form == "tabulated":
            if self.values is None:
                raise InvalidModelError("tabulated model needs values")
            v = np.array(self.values, dtype=float)
            if v.ndim != 1 or len(v) < 16 or len(v) & (len(v) - 1):
                raise InvalidModelError("tabulated values need a power-of-two length >= 16")
            if not np.all(np.isfinite(v)):
                raise InvalidModelError("tabulated values must be finite")
            if np.any(v < 0):
                raise InvalidModelError("tabulated density must be nonnegative")
            v.setflags(write=False)
            object.__setattr__(self, "values", v)

    # constructors -------------------------------------------------------

    @classmethod
    def white(cls, sigma: float = 1.0):
        return cls("white", sigma=sigma)

    @classmethod
    def ar1(cls, rho, sigma: float = 1.0):
        return cls("ar1", sigma=sigma, rho=rho)

    @classmethod
    def ma1(cls, rho, sigma: float = 1.0):
        return cls("ma1", sigma=sigma, rho=rho)

    @classmethod
    def ou(cls):
        return cls("ou", domain=Domain.LINE)

    @classmethod
    def tabulated(cls, values: Sequence[float]):
        return cls("tabulated", values=values)

    # evaluation ---------------------------------------------------------

    @property
    def is_parametric(self) -> bool:
        return self.form != "tabulated"

    def density(self, u):
        u = np.asarray(u, dtype=float)
        s2 = self.sigma**2
        if self.form == "white":
            f = np.full(u.shape, s2 / (2 * np.pi))
        elif self.form == "ar1":
            f = s2 / (2 * np.pi * np.abs(1 - self.rho * np.exp(-1j * u)) ** 2)
        elif self.form == "ma1":
            f = s2 * np.abs(1 + self.rho * np.exp(-1j * u)) ** 2 / (2 * np.pi)
        elif self.form == "ou":
            f = 2.0 / (np.pi * (4 * u**2 + 1))
        else:
            n = len(self.values)
            k = np.floor((u + np.pi) / (2 * np.pi) * n).astype(int) % n
            f = self.values[k]
        return f

    def on_grid(self, grid: FrequencyGrid) -> np.ndarray:
        if self.domain is not Domain.CIRCLE:
            raise UnsupportedError("grid evaluation is only defined on the circle")
        if self.form == "tabulated" and len(self.values) == grid.N:
            return np.array(self.values)
        return self.density(grid.points)

    @property
    def variance(self) -> float:
        """``K_B(0)``, the total mass of the spectral measure."""
        s2 = self.sigma**2
        r2 = abs(self.rho) ** 2
        if self.form == "white":
            return s2
        if self.form == "ar1":
            return s2 / (1 - r2)
        if self.form == "ma1":
            return s2 * (1 + r2)
        if self.form == "ou":
            return 1.0
        return float(2 * np.pi * np.mean(self.values))

    def default_grid(self) -> FrequencyGrid:
        if self.form == "tabulated":
            return FrequencyGrid(len(self.values))
        return FrequencyGrid(DEFAULT_GRID_SIZE)

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        d = {"domain": self.domain.value, "form": self.form}
        if self.form in ("white", "ar1", "ma1"):
            d["sigma"] = self.sigma
        if self.form in ("ar1", "ma1"):
            d["rho"] = [self.rho.real, self.rho.imag]
        if self.form == "tabulated":
            d["values"] = self.values.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SpectralModel":
        form = d.get("form")
        if form not in FORMS:
            raise InvalidModelError(f"unknown model form {form!r}")
        default_domain = "line" if form == "ou" else "circle"
        try:
            domain = Domain(d.get("domain", default_domain))
        except ValueError:
            raise InvalidModelError(f"unknown domain {d.get('domain')!r}") from None
        rho = d.get("rho", 0.0)
        if isinstance(rho, (list, tuple)):
            rho = complex(rho[0], rho[1] if len(rho) > 1 else 0.0)
        return cls(
            form,
            domain=domain,
            sigma=d.get("sigma", 1.0),
            rho=rho,
            values=d.get("values"),
        )


def eval_density(model: SpectralModel, u):
    f = model.density(u)
    if not np.all(np.isfinite(f)):
        raise InvalidModelError("density is not finite")
    return f


def log_density(f) -> np.ndarray:
    return np.log(np.maximum(f, F_FLOOR))


# ---------------------------------------------------------------------------
# Integration helpers
# ---------------------------------------------------------------------------


def line_quad(func: Callable[[float], float], scale: float = 1.0) -> float:
    """``int_R func(u) / (1 + (u/scale)^2) du / scale`` via ``u = scale*tan(theta)``.

    The substitution turns the weight into ``d theta`` on ``(-pi/2, pi/2)``.
    """

    def g(theta):
        return func(scale * math.tan(theta))

    val, _ = integrate.quad(g, -np.pi / 2, np.pi / 2, limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


def integrate_against(model: SpectralModel, weight: Callable, grid: FrequencyGrid | None = None):
    """``int weight(u) f(u) du`` over the model's domain.

    ``weight`` is vectorized for circle models and scalar for line models.
    """
    if model.domain is Domain.CIRCLE:
        grid = grid or model.default_grid()
        u = grid.points
        return grid.integrate(weight(u) * model.on_grid(grid))

    # f decays like 1/u^2 for OU, so weight * f * (1+u^2) stays bounded
    def h(u):
        return complex(weight(u)) * float(model.density(u)) * (1 + u * u)

    re = line_quad(lambda u: h(u).real)
    im = line_quad(lambda u: h(u).imag)
    return re if im == 0 else complex(re, im)


def kolmogorov_integral(model: SpectralModel, grid: FrequencyGrid | None = None) -> float:
    """Signed log-integral of the density; ``-inf`` in the degenerate regime.

    Circle: ``int_T ln f du``.  Line: ``int_R ln f / (1 + u^2) du``.  A
    tabulated density with a zero cell is treated as exactly ``-inf``.
    """
    if model.domain is Domain.LINE:
        val = line_quad(lambda u: float(np.log(max(model.density(u), F_FLOOR))))
    else:
        grid = grid or model.default_grid()
        f = model.on_grid(grid)
        if not np.all(np.isfinite(f)):
            raise InvalidModelError("density is not finite")
        if model.form == "tabulated" and np.any(f <= F_FLOOR):
            return -math.inf
        val = float(grid.integrate(log_density(f)))
    if not math.isfinite(val):
        if val > 0:
            raise InvalidModelError("log-density integral diverges to +inf")
        return -math.inf
    if val < MINUS_INF_THRESHOLD:
        return -math.inf
    return val


def prediction_variance(model: SpectralModel, grid: FrequencyGrid | None = None) -> float:
    """One-step prediction error ``2 pi exp(int ln f du / 2 pi)`` on the circle."""
    k = kolmogorov_integral(model, grid)
    if k == -math.inf:
        return 0.0
    return 2 * np.pi * math.exp(k / (2 * np.pi))
