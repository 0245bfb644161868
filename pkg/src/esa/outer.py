"""Outer factors ``gamma_f`` with ``|gamma_f|^2 = f`` and the kappa constant.

On the circle the factor is built cepstrally: with ``a_j`` the coefficients
of ``ln f = sum_j a_j e^{-iju}``,

    gamma_f(u) = exp(a_0 / 2 + sum_{j>=1} a_j e^{-iju}),

which carries only nonpositive frequencies and has ``gamma_hat_0 > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import kinetic_beta
from .errors import InvalidModelError, PerfectPredictionError, ResolutionError, UnsupportedError
from .spectral import (
    Domain,
    FrequencyGrid,
    SpectralModel,
    fourier_coeffs,
    from_fourier,
    kolmogorov_integral,
    line_quad,
    log_density,
)

ALIAS_TOL = 1e-10
MAX_GRID = 2**20


@dataclass(frozen=True, eq=False)
class OuterFactor:
    grid: FrequencyGrid
    values: np.ndarray
    coeffs: np.ndarray
    near_degenerate: bool = False
    cepstral_grid: int = 0

    def to_csv(self) -> str:
        rows = ["j,re,im"]
        rows += [f"{j},{complex(c).real!r},{complex(c).imag!r}" for j, c in enumerate(self.coeffs)]
        return "\n".join(rows) + "\n"


def _aliased(d: np.ndarray) -> bool:
    n = len(d)
    tau = np.abs(np.fft.fftfreq(n, 1.0 / n))
    ref = max(abs(d[0]), np.max(np.abs(d)))
    if ref == 0:
        return False
    return bool(np.max(np.abs(d[tau >= n // 4])) > ALIAS_TOL * ref)


def outer_factor_circle(model: SpectralModel, grid: FrequencyGrid | None = None) -> OuterFactor:
    """Cepstral outer factor sampled on ``grid``.

    Parametric densities are re-sampled on a finer grid when the cepstrum has
    not decayed by a quarter of the grid; tabulated densities cannot be and
    are flagged ``near_degenerate`` instead.
    """
    if model.domain is not Domain.CIRCLE:
        raise UnsupportedError("cepstral factorization needs a circle model")
    grid = grid or model.default_grid()
    if kolmogorov_integral(model, grid) == -math.inf:
        raise PerfectPredictionError("log-density integral is -inf")

    n = grid.N
    near_degenerate = False
    while True:
        fine = FrequencyGrid(n)
        f = model.on_grid(fine)
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise InvalidModelError("density must be finite and nonnegative")
        d = fourier_coeffs(log_density(f))
        if not _aliased(d):
            break
        if not model.is_parametric:
            near_degenerate = True
            break
        if n >= MAX_GRID:
            raise ResolutionError(f"cepstrum still aliased at N={n}")
        n *= 2

    # keep tau <= 0; Nyquist and DC are shared by both halves of ln f
    h = np.zeros(n, dtype=complex)
    h[0] = d[0] / 2
    h[n // 2] = d[n // 2] / 2
    h[n // 2 + 1 :] = d[n // 2 + 1 :]
    gamma = np.exp(from_fourier(h))
    coeffs = fourier_coeffs(gamma)
    causal = np.concatenate(([coeffs[0]], coeffs[::-1][: n - 1]))
    step = n // grid.N
    return OuterFactor(
        grid=grid,
        values=gamma[::step],
        coeffs=causal[: grid.N],
        near_degenerate=near_degenerate,
        cepstral_grid=n,
    )


@dataclass(frozen=True)
class RationalOuterFactor:
    """Closed-form OU factor ``sqrt(2/pi) / (1 + 2iu)``."""

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return math.sqrt(2 / math.pi) / (1 + 2j * u)

    def kernel(self, tau):
        """``gamma_hat(tau)`` with ``gamma_f(u) = int_0^inf gamma_hat(tau) e^{-i tau u} d tau``."""
        tau = np.asarray(tau, dtype=float)
        return np.where(tau >= 0, np.exp(-tau / 2) / math.sqrt(2 * math.pi), 0.0)


def outer_factor_line_rational(model: SpectralModel) -> RationalOuterFactor:
    if model.form != "ou":
        raise UnsupportedError("only the OU model has a rational line factorization")
    return RationalOuterFactor()


# ---------------------------------------------------------------------------
# kappa
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KappaConstant:
    value: complex
    method: str
    alternatives: dict = field(default_factory=dict)
    perfect_prediction: bool = False

    def max_relative_spread(self) -> float:
        vals = [self.value, *self.alternatives.values()]
        ref = max(abs(v) for v in vals)
        if ref == 0:
            return 0.0
        return max(abs(a - b) for a in vals for b in vals) / ref


def kappa_series(outer: OuterFactor, beta: float) -> complex:
    j = np.arange(len(outer.coeffs))
    return complex(np.sum(outer.coeffs * beta ** (-j.astype(float))))


def kappa_boundary_circle(model: SpectralModel, beta: float, grid: FrequencyGrid | None = None) -> complex:
    """``exp{(1/4pi) int (e^{-iu} + 1/beta)/(e^{-iu} - 1/beta) ln f du}``."""
    grid = grid or model.default_grid()
    w = np.exp(-1j * grid.points)
    kern = (w + 1 / beta) / (w - 1 / beta)
    return complex(np.exp(grid.integrate(kern * log_density(model.on_grid(grid))) / (4 * np.pi)))


def kappa_boundary_line(model: SpectralModel, alpha: float) -> complex:
    """``(1/alpha) exp{(1/2pi) int (alpha + iu)/(1 + i alpha u) ln f/(1+u^2) du}``."""

    def g(u):
        return (alpha + 1j * u) / (1 + 1j * alpha * u) * math.log(max(float(model.density(u)), 1e-300))

    re = line_quad(lambda u: g(u).real)
    im = line_quad(lambda u: g(u).imag)
    return complex(np.exp(complex(re, im) / (2 * math.pi)) / alpha)


def kappa_closed_form(model: SpectralModel, alpha: float) -> complex:
    """Parametric closed forms, in the canonical phase ``gamma_hat_0 > 0``."""
    c = model.sigma / math.sqrt(2 * math.pi)
    if model.form == "ou":
        return complex(math.sqrt(2) / (math.sqrt(math.pi) * (2 + alpha)))
    beta = kinetic_beta(alpha)
    rho = model.rho
    if model.form == "white":
        return complex(c)
    if model.form == "ar1":
        return c / (1 - rho / beta)
    if model.form == "ma1":
        if abs(rho) < 1:
            return c * (1 + rho / beta)
        # gamma_f = c (conj(rho) + e^{-iu}); rotate so gamma_hat_0 > 0
        return c * (np.conj(rho) + 1 / beta) * abs(rho) / np.conj(rho)
    raise UnsupportedError(f"no closed-form kappa for {model.form}")


def kappa(model: SpectralModel, alpha: float, grid: FrequencyGrid | None = None) -> KappaConstant:
    """kappa for kinetic energy, with every available method as a cross-check."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if model.domain is Domain.LINE:
        alts = {"boundary-integral": kappa_boundary_line(model, alpha)}
        if model.form == "ou":
            return KappaConstant(kappa_closed_form(model, alpha), "closed-form", alts)
        return KappaConstant(alts["boundary-integral"], "boundary-integral")

    grid = grid or model.default_grid()
    if kolmogorov_integral(model, grid) == -math.inf:
        return KappaConstant(0j, "closed-form", perfect_prediction=True)
    beta = kinetic_beta(alpha)
    outer = outer_factor_circle(model, grid)
    alts = {"boundary-integral": kappa_boundary_circle(model, beta, grid)}
    if model.is_parametric:
        alts["closed-form"] = kappa_closed_form(model, alpha)
    return KappaConstant(kappa_series(outer, beta), "series", alts)
