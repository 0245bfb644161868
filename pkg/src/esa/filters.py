"""Time-domain filters from frequency-domain solutions.

A transfer function ``g(u) = sum_tau w(tau) e^{i tau u}`` acts on a path as
``X(t) = sum_tau w(tau) B(t + tau)``.  Causal taps are stored by lag,
``taps[j] = w(-j)``, so that ``X(t) = sum_j taps[j] B(t - j)``.  Tap phases
follow the canonical outer factor (``gamma_hat_0 > 0``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .energy import kinetic_beta
from .errors import CausalityViolationError
from .solver import AdaptiveSolution
from .spectral import Domain, GridFunction, from_fourier

LEAKAGE_TOL = 1e-8
TAIL_REL_TOL = 1e-10


def _rows_csv(header, rows) -> str:
    lines = [header] + [f"{k},{complex(c).real!r},{complex(c).imag!r}" for k, c in rows]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class CausalTaps:
    weights: np.ndarray
    tail_bound: float
    leakage: float = 0.0

    @property
    def K(self) -> int:
        return len(self.weights) - 1

    def transfer(self, grid) -> GridFunction:
        """Evaluate ``sum_j weights[j] e^{-iju}`` on ``grid``."""
        d = np.zeros(grid.N, dtype=complex)
        k = min(len(self.weights), grid.N)
        d[0] = self.weights[0]
        d[grid.N - k + 1 :] = self.weights[1:k][::-1]
        return GridFunction(grid, from_fourier(d))

    def to_csv(self) -> str:
        return _rows_csv("lag,re,im", enumerate(self.weights))

    def to_json(self) -> str:
        return json.dumps(
            {
                "lags": list(range(len(self.weights))),
                "weights": [[w.real, w.imag] for w in self.weights],
                "tail_bound": self.tail_bound,
                "leakage": self.leakage,
            }
        )


@dataclass(frozen=True, eq=False)
class TwoSidedTaps:
    """Weights ``g(-K)..g(K)``; ``X(t) = sum_k g(k) B(t + k)``."""

    weights: np.ndarray

    @property
    def K(self) -> int:
        return (len(self.weights) - 1) // 2

    def __getitem__(self, k: int) -> complex:
        return self.weights[k + self.K]

    def symbol(self, u):
        k = np.arange(-self.K, self.K + 1)
        return np.exp(1j * np.multiply.outer(np.asarray(u, dtype=float), k)) @ self.weights

    def to_csv(self) -> str:
        return _rows_csv("lag,re,im", zip(range(-self.K, self.K + 1), self.weights))

    def to_json(self) -> str:
        return json.dumps(
            {"lags": list(range(-self.K, self.K + 1)), "weights": [[w.real, w.imag] for w in self.weights]}
        )


@dataclass(frozen=True)
class ExponentialFilter:
    """Continuous kernel ``gain * exp(-decay * |s|)``.

    ``causal`` kernels act as ``X(t) = int_0^inf k(s) B(t - s) ds``, two-sided
    ones integrate over all of ``R``.
    """

    gain: float
    decay: float
    causal: bool

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        k = self.gain * np.exp(-self.decay * np.abs(s))
        return np.where(s >= 0, k, 0.0) if self.causal else k

    @property
    def mass(self) -> float:
        m = self.gain / self.decay
        return m if self.causal else 2 * m

    def to_json(self) -> str:
        return json.dumps({"gain": self.gain, "decay": self.decay, "causal": self.causal})


def causal_taps(solution: AdaptiveSolution, K: int | None = None) -> CausalTaps:
    """Truncate the impulse response of ``g*`` to lags ``0..K``.

    With ``K=None`` the smallest lag count whose discarded tail is below
    ``1e-10 * ||g*||`` is used, capped at ``N/4``.
    """
    if solution.perfect_prediction:
        raise ValueError("no causal filter in the perfect-prediction regime")
    grid = solution.grid
    n = grid.N
    d = solution.g_star.coeffs()
    total = float(np.sum(np.abs(d) ** 2))
    tau = grid.frequencies()
    leakage = float(np.sum(np.abs(d[tau > 0]) ** 2)) / total if total > 0 else 0.0
    if leakage > LEAKAGE_TOL:
        raise CausalityViolationError(f"anticausal energy fraction {leakage:.3g}")

    by_lag = np.concatenate(([d[0]], d[::-1][: n // 2]))  # lags 0..n/2
    if K is None:
        tail = np.cumsum((np.abs(by_lag) ** 2)[::-1])[::-1]  # tail[k] = sum_{j>=k}
        tail = np.append(tail, 0.0)
        thresh = (TAIL_REL_TOL**2) * total
        K = int(np.argmax(tail[1:] <= thresh)) if np.any(tail[1:] <= thresh) else n // 4
        K = min(K, n // 4)
    K = int(K)
    if K < 0:
        raise ValueError("K must be nonnegative")
    weights = by_lag[: K + 1].copy()

    kept = (tau <= 0) & (tau >= -K)
    discarded_l2 = 2 * math.pi * float(np.sum(np.abs(d[~kept]) ** 2))
    u = grid.points
    l2 = np.abs(solution.ell.symbol(u, Domain.CIRCLE)) ** 2
    sup = max(1.0, float(np.max((1 + l2) * solution.model.on_grid(grid))))
    # bounds both the L2 reconstruction error and the objective inflation
    tail_bound = max(math.sqrt(discarded_l2), sup * discarded_l2)
    return CausalTaps(weights, tail_bound, leakage)


def nonadaptive_taps(alpha: float, domain: Domain = Domain.CIRCLE, K: int | None = None):
    """Two-sided optimal filter for kinetic energy.

    Circle: ``g(k) = beta^{-|k|} / sqrt(1 + 4 alpha^2)``.  Line: the kernel
    ``exp(-|s|/alpha) / (2 alpha)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if domain is Domain.LINE:
        return ExponentialFilter(1 / (2 * alpha), 1 / alpha, causal=False)
    beta = kinetic_beta(alpha)
    if K is None:
        K = int(math.ceil(60 * math.log(10) / math.log(beta)))
    k = np.arange(-K, K + 1)
    w = beta ** (-np.abs(k).astype(float)) / math.sqrt(1 + 4 * alpha**2)
    return TwoSidedTaps(w.astype(complex))


def ou_causal_kernel(alpha: float) -> ExponentialFilter:
    """Optimal causal OU filter ``2/((2+alpha) alpha) * exp(-s/alpha)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return ExponentialFilter(2 / ((2 + alpha) * alpha), 1 / alpha, causal=True)
