"""Spectral factorization of the energy symbol ``1 + |l|^2``.

On the circle ``1 + |l(e^{iu})|^2 = |lam(u)|^2`` with

    lam(u) = scale * prod_m (e^{-iu} - conj(beta_m)),    |beta_m| > 1,

and on the line ``1 + |l(iu)|^2 = |lam(u)|^2`` with

    lam(u) = scale * prod_m |beta_m| * (1 - u / beta_m),   Im beta_m > 0.

Both choices make ``1/lam`` expandable over nonpositive frequencies only.
The line form is ``C^{1/2} prod (u - beta_m)`` up to a unimodular constant,
picked so that ``lam(0) > 0`` (kinetic energy gives ``1 + i alpha u``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEnergyError,
    FactorizationError,
    UnsupportedMultiplicityError,
)
from .spectral import Domain, EnergyPolynomial

ROOT_GAP = 1e-9
RESIDUAL_TARGET = 1e-13


def kinetic_beta(alpha: float) -> float:
    """Root ``beta > 1`` of the discrete kinetic energy factorization."""
    a2 = alpha * alpha
    s = math.sqrt(1 + 4 * a2)
    return (2 * a2 + 1 + s) / (2 * a2)


@dataclass(frozen=True)
class EnergyFactor:
    domain: Domain
    scale: float
    roots: tuple = ()

    def __call__(self, u):
        return eval_factor(self, u)

    @property
    def degree(self) -> int:
        return len(self.roots)

    def to_json(self) -> dict:
        return {
            "scale": self.scale,
            "roots": [[b.real, b.imag] for b in self.roots],
            "domain": self.domain.value,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EnergyFactor":
        return cls(
            Domain(d["domain"]),
            float(d["scale"]),
            tuple(complex(r[0], r[1]) for r in d["roots"]),
        )


def eval_factor(lam: EnergyFactor, u):
    u = np.asarray(u, dtype=float)
    out = np.full(u.shape, lam.scale, dtype=complex)
    if lam.domain is Domain.CIRCLE:
        w = np.exp(-1j * u)
        for b in lam.roots:
            out = out * (w - np.conj(b))
    else:
        for b in lam.roots:
            out = out * (abs(b) * (1 - u / b))
    return out


def _polish(coeffs_desc: np.ndarray, roots: np.ndarray, steps: int = 8) -> np.ndarray:
    dp = np.polyder(coeffs_desc)
    out = roots.copy()
    for i, z in enumerate(out):
        for _ in range(steps):
            p = np.polyval(coeffs_desc, z)
            d = np.polyval(dp, z)
            if d == 0:
                break
            step = p / d
            z_new = z - step
            if abs(np.polyval(coeffs_desc, z_new)) >= abs(p):
                break
            z = z_new
        out[i] = z
    return out


def _roots(coeffs_asc: np.ndarray) -> np.ndarray:
    desc = coeffs_asc[::-1]
    roots = _polish(desc, np.roots(desc))
    mags = np.abs(roots)
    scale = np.array([np.sum(np.abs(desc) * m ** np.arange(len(desc) - 1, -1, -1)) for m in mags])
    residuals = np.abs(np.polyval(desc, roots)) / scale
    if np.any(residuals > 1e3 * RESIDUAL_TARGET):
        raise FactorizationError(
            f"root finder residual {residuals.max():.3g} above target", residuals=residuals
        )
    return roots


def energy_laurent(ell: EnergyPolynomial) -> np.ndarray:
    """Ascending coefficients of ``z^M (1 + l(z) conj(l)(1/z))``."""
    c = np.array(ell.coeffs)
    p = np.convolve(c, np.conj(c)[::-1])
    p[len(c) - 1] += 1
    return p


def factor_energy(ell: EnergyPolynomial, domain: Domain) -> EnergyFactor:
    """Factor ``1 + |l|^2`` into ``lam * conj(lam)`` with causal ``1/lam``."""
    if domain is Domain.CIRCLE:
        return _factor_circle(ell)
    return _factor_line(ell)


def _factor_circle(ell: EnergyPolynomial) -> EnergyFactor:
    c = list(ell.coeffs)
    # |z^k l~(z)| = |l~(z)| on the unit circle
    k = 0
    while k < len(c) - 1 and c[k] == 0:
        k += 1
    red = EnergyPolynomial(tuple(c[k:]))
    m = red.degree
    if m == 0:
        return EnergyFactor(Domain.CIRCLE, math.sqrt(1 + abs(red.coeffs[0]) ** 2))

    roots = _roots(energy_laurent(red))
    order = np.argsort(-np.abs(roots))
    outer = roots[order[:m]]
    inner = roots[order[m:]]
    if np.min(np.abs(outer)) <= 1 + ROOT_GAP or np.max(np.abs(inner)) >= 1 - ROOT_GAP:
        raise DegenerateEnergyError("energy polynomial has a root on the unit circle")
    value_at_one = 1 + abs(red(1.0)) ** 2
    r = value_at_one / np.prod(np.abs(1 - np.conj(outer)) ** 2)
    return EnergyFactor(Domain.CIRCLE, float(math.sqrt(r)), tuple(complex(b) for b in outer))


def _factor_line(ell: EnergyPolynomial) -> EnergyFactor:
    m = ell.degree
    if m == 0:
        return EnergyFactor(Domain.LINE, math.sqrt(1 + abs(ell.coeffs[0]) ** 2))
    a = np.array(ell.coeffs) * (1j ** np.arange(m + 1))
    p = np.convolve(a, np.conj(a))
    p[0] += 1
    roots = _roots(p.real.astype(complex))
    upper = roots[roots.imag > 0]
    if len(upper) != m or np.min(upper.imag) <= ROOT_GAP:
        raise DegenerateEnergyError("energy polynomial has a real root")
    scale = abs(ell.coeffs[-1])
    return EnergyFactor(Domain.LINE, float(scale), tuple(complex(b) for b in upper))


# ---------------------------------------------------------------------------
# Causal expansion of 1/lam
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CausalExpansion:
    """``1/lam(u) ~ sum_{tau=0}^{T} coeffs[tau] e^{-i tau u}`` on the circle."""

    coeffs: np.ndarray
    tail_bound: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        tau = np.arange(len(self.coeffs))
        return np.exp(-1j * np.multiply.outer(u, tau)) @ self.coeffs


@dataclass(frozen=True, eq=False)
class ExponentialKernel:
    """Continuous kernel ``nu(tau) = sum_m weights[m] exp(i roots[m] tau)``, tau >= 0.

    ``1/lam(u) = int_0^inf nu(tau) e^{-i tau u} d tau``.
    """

    weights: np.ndarray
    roots: np.ndarray

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.exp(1j * np.multiply.outer(tau, self.roots)) @ self.weights


def _partial_fractions(points: np.ndarray) -> np.ndarray:
    n = len(points)
    if n > 1:
        gaps = np.abs(points[:, None] - points[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < 1e-8:
            raise UnsupportedMultiplicityError("repeated energy roots")
    return np.array([1 / np.prod([points[i] - points[j] for j in range(n) if j != i]) for i in range(n)])


def causal_inverse(lam: EnergyFactor, tol: float = 1e-12, max_terms: int = 1_000_000):
    """Expand ``1/lam`` over nonpositive frequencies.

    Returns a :class:`CausalExpansion` on the circle, with the number of terms
    chosen from an exact geometric tail bound, or an :class:`ExponentialKernel`
    on the line.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    roots = np.array(lam.roots, dtype=complex)
    if lam.domain is Domain.LINE:
        if len(roots) == 0:
            raise ValueError("constant factor has no kernel representation")
        a = _partial_fractions(roots)
        k = lam.scale * np.prod(np.abs(roots))
        lead = np.prod(-roots) / k
        return ExponentialKernel(1j * a * lead, roots)

    if len(roots) == 0:
        return CausalExpansion(np.array([1 / lam.scale], dtype=complex), 0.0)
    b = np.conj(roots)
    a = _partial_fractions(b)
    # 1/(w - b) = -(1/b) sum_tau (w/b)^tau with w = e^{-iu}
    amp = np.abs(a) / np.abs(b) / lam.scale
    ratio = 1 / np.abs(b)

    def tail(t):
        return float(np.sum(amp * ratio ** (t + 1) / (1 - ratio)))

    t = 0
    while tail(t) > tol:
        t += 1
        if t > max_terms:
            raise ValueError("causal expansion needs too many terms for tol")
    tau = np.arange(t + 1)
    coeffs = -(a / b / lam.scale) @ (b[:, None] ** (-tau[None, :]).astype(float))
    return CausalExpansion(np.asarray(coeffs, dtype=complex), tail(t))
