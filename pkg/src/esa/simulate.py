"""Monte Carlo validation of the error formulas.

Paths are generated in the time domain from Gaussian innovations.  Each
``(seed, replicate_index)`` pair keys its own Philox stream, so replicates
are reproducible and independent of the order they run in.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import InsufficientDataError, InvalidModelError, UnsupportedError
from .filters import CausalTaps, causal_taps
from .solver import AdaptiveSolution, ErrorTriple, closed_form_errors, solve_adaptive_circle
from .spectral import EnergyPolynomial, FrequencyGrid, SpectralModel

N_BATCHES = 32
MIN_BATCH = 1000
DEFAULT_SEED = 0x5EED


@dataclass(frozen=True)
class PathSpec:
    model: SpectralModel
    n: int
    burn_in: int = 0
    seed: int = DEFAULT_SEED
    replicate_index: int = 0
    delta: float = 0.01  # OU sampling step; ignored otherwise

    def __post_init__(self):
        if not self.model.is_parametric:
            raise InvalidModelError("paths need a parametric model")
        if not (self.n > self.burn_in >= 0):
            raise ValueError("need n > burn_in >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def default_burn_in(model: SpectralModel, K: int = 0) -> int:
    r = abs(model.rho) if model.form == "ar1" else 0.0
    return int(max(10 * K, math.ceil(10 / (1 - r))))


def rng_for(seed: int, replicate_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(replicate_index << 64) | seed))


def _innovations(rng, n, sigma, complex_valued):
    if complex_valued:
        z = rng.standard_normal((2, n))
        return sigma * (z[0] + 1j * z[1]) / math.sqrt(2)
    return sigma * rng.standard_normal(n)


def ou_surrogate(delta: float) -> SpectralModel:
    """AR(1) sampling of the unit OU process at step ``delta``."""
    r = math.exp(-delta / 2)
    return SpectralModel.ar1(r, math.sqrt(1 - r * r))


def gen_path(spec: PathSpec) -> np.ndarray:
    model = spec.model
    if model.form == "ou":
        model = ou_surrogate(spec.delta)
    rng = rng_for(spec.seed, spec.replicate_index)
    n = spec.n
    rho = model.rho
    cplx = rho.imag != 0
    if model.form == "white":
        return _innovations(rng, n, model.sigma, False)
    if model.form == "ma1":
        xi = _innovations(rng, n + 1, model.sigma, cplx)
        b = xi[1:] + rho * xi[:-1]
        return b if cplx else b.real
    if model.form == "ar1":
        if abs(rho) >= 1:
            raise InvalidModelError("AR(1) requires |rho| < 1")
        sd = model.sigma / math.sqrt(1 - abs(rho) ** 2)
        b0 = _innovations(rng, 1, sd, cplx)[0]
        xi = _innovations(rng, n, model.sigma, cplx)
        coeff = rho if cplx else rho.real
        b, _ = signal.lfilter([1.0], [1.0, -coeff], xi, zi=[coeff * b0])
        return b
    raise UnsupportedError(f"cannot simulate {model.form}")


def apply_causal_filter(path: np.ndarray, taps: CausalTaps | np.ndarray) -> np.ndarray:
    """``X(t) = sum_j taps[j] B(t - j)``; the first ``K`` samples are NaN."""
    w = taps.weights if isinstance(taps, CausalTaps) else np.asarray(taps)
    if np.isrealobj(path) and np.max(np.abs(np.imag(w)), initial=0) <= 1e-12 * np.max(np.abs(w), initial=1):
        w = np.real(w)
    x = signal.lfilter(w, [1.0], path)
    x = x.astype(np.result_type(x, float))
    x[: len(w) - 1] = np.nan
    return x


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EstimateReport:
    tracking_mse_hat: float
    mean_energy_hat: float
    batch_tracking: np.ndarray
    batch_energy: np.ndarray
    n_used: int
    reference: ErrorTriple | None = None
    reference_split: tuple | None = None

    @property
    def total_hat(self) -> float:
        return self.tracking_mse_hat + self.mean_energy_hat

    @staticmethod
    def _se(batches) -> float:
        return float(np.std(batches, ddof=1) / math.sqrt(len(batches)))

    @property
    def se_tracking(self) -> float:
        return self._se(self.batch_tracking)

    @property
    def se_energy(self) -> float:
        return self._se(self.batch_energy)

    @property
    def se_total(self) -> float:
        return self._se(self.batch_tracking + self.batch_energy)

    @property
    def z_scores(self) -> dict:
        def z(est, ref, se):
            if se == 0:
                return 0.0 if est == ref else math.copysign(math.inf, est - ref)
            return (est - ref) / se

        out = {}
        if self.reference is not None:
            out["total"] = z(self.total_hat, self.reference.err_a, self.se_total)
        if self.reference_split is not None:
            out["tracking"] = z(self.tracking_mse_hat, self.reference_split[0], self.se_tracking)
            out["energy"] = z(self.mean_energy_hat, self.reference_split[1], self.se_energy)
        return out

    def to_json(self) -> dict:
        d = {
            "estimates": {
                "tracking_mse": self.tracking_mse_hat,
                "mean_energy": self.mean_energy_hat,
                "total": self.total_hat,
            },
            "standard_errors": {
                "tracking_mse": self.se_tracking,
                "mean_energy": self.se_energy,
                "total": self.se_total,
            },
            "z_scores": self.z_scores,
            "n": self.n_used,
        }
        if self.reference is not None:
            d["reference"] = self.reference.to_json()
            if self.reference_split is not None:
                d["reference"]["tracking_mse"] = self.reference_split[0]
                d["reference"]["mean_energy"] = self.reference_split[1]
        return d


def estimate_objective(
    b: np.ndarray,
    x: np.ndarray,
    ell: EnergyPolynomial,
    reference: ErrorTriple | None = None,
    reference_split: tuple | None = None,
    start: int = 0,
    n_batches: int = N_BATCHES,
) -> EstimateReport:
    """Batch-means estimates of ``E|X - B|^2`` and ``E|sum_m l_m X(t+m)|^2``."""
    b = np.asarray(b)
    x = np.asarray(x)
    if b.shape != x.shape:
        raise ValueError("paths must be aligned")
    m = ell.degree
    finite = np.flatnonzero(np.isfinite(x))
    t0 = max(start, int(finite[0]) if len(finite) else len(x))
    t1 = len(x) - m  # forward stencil needs X(t+m)
    usable = t1 - t0
    if usable < n_batches * MIN_BATCH:
        raise InsufficientDataError(f"{usable} usable samples, need {n_batches * MIN_BATCH}")
    size = usable // n_batches
    t1 = t0 + size * n_batches

    tracking = np.abs(x[t0:t1] - b[t0:t1]) ** 2
    incr = np.zeros(t1 - t0, dtype=np.result_type(x, complex))
    for k, c in enumerate(ell.coeffs):
        if c != 0:
            incr += c * x[t0 + k : t1 + k]
    energy = np.abs(incr) ** 2

    bt = tracking.reshape(n_batches, size).mean(axis=1)
    be = energy.reshape(n_batches, size).mean(axis=1)
    return EstimateReport(
        float(bt.mean()), float(be.mean()), bt, be, size * n_batches, reference, reference_split
    )


def pool_reports(reports) -> EstimateReport:
    """Merge equal-size replicate reports by concatenating their batches."""
    reports = list(reports)
    bt = np.concatenate([r.batch_tracking for r in reports])
    be = np.concatenate([r.batch_energy for r in reports])
    first = reports[0]
    return EstimateReport(
        float(bt.mean()), float(be.mean()), bt, be,
        sum(r.n_used for r in reports), first.reference, first.reference_split,
    )


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    solution: AdaptiveSolution
    taps: CausalTaps
    replicates: list
    pooled: EstimateReport
    seed: int
    n: int
    meta: dict = field(default_factory=dict)

    def replicates_csv(self) -> str:
        rows = ["replicate,tracking,energy,total"]
        for i, r in enumerate(self.replicates):
            rows.append(f"{i},{r.tracking_mse_hat!r},{r.mean_energy_hat!r},{r.total_hat!r}")
        return "\n".join(rows) + "\n"

    def summary(self) -> dict:
        d = self.pooled.to_json()
        d["n"] = self.n
        d["reps"] = len(self.replicates)
        d["seed"] = self.seed
        d["replicate_z_scores"] = [r.z_scores.get("total") for r in self.replicates]
        return d


def run_replicate(model, ell, taps, n, seed, index, burn_in, reference=None, reference_split=None):
    path = gen_path(PathSpec(model, n, burn_in, seed, index))
    x = apply_causal_filter(path, taps)
    return estimate_objective(path, x, ell, reference, reference_split, start=burn_in)


def monte_carlo(
    model: SpectralModel,
    ell: EnergyPolynomial,
    n: int = 1_000_000,
    reps: int = 8,
    seed: int = DEFAULT_SEED,
    grid: FrequencyGrid | None = None,
    taps: CausalTaps | None = None,
    workers: int = 1,
) -> MonteCarloResult:
    """Simulate the optimal causal filter and compare with its error triple."""
    if reps < 1:
        raise ValueError("reps must be positive")
    sol = solve_adaptive_circle(model, ell, grid)
    if taps is None:
        taps = causal_taps(sol)
    alpha = ell.kinetic_alpha(model.domain)
    reference = closed_form_errors(model, alpha) if alpha else sol.errors
    split = (sol.tracking_mse, sol.mean_energy)
    burn_in = default_burn_in(model, taps.K)

    def one(i):
        return run_replicate(model, ell, taps, n, seed, i, burn_in, reference, split)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            reports = list(ex.map(one, range(reps)))
    else:
        reports = [one(i) for i in range(reps)]
    return MonteCarloResult(sol, taps, reports, pool_reports(reports), seed, n)


# ---------------------------------------------------------------------------
# OU discretization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StudyRow:
    delta: float
    err_a: float
    limit: float

    @property
    def gap(self) -> float:
        return abs(self.err_a - self.limit)


def ou_discretization_study(alpha: float, deltas) -> list[StudyRow]:
    """AR(1) surrogate errors with ``alpha_delta = alpha / delta`` against the OU limit."""
    deltas = [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas) or deltas != sorted(deltas, reverse=True):
        raise ValueError("deltas must be positive and decreasing")
    limit = closed_form_errors(SpectralModel.ou(), alpha).err_a
    return [StudyRow(d, closed_form_errors(ou_surrogate(d), alpha / d).err_a, limit) for d in deltas]
