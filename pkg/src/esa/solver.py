"""Optimal non-adaptive and adaptive approximations and their errors.

The objective for a transfer function ``g`` is

    J(g) = int [ |g - 1|^2 + |g|^2 |l|^2 ] f du,

minimised without constraint by ``1 / (1 + |l|^2)`` (error ``err_na``) and
over causal ``g`` (nonpositive frequencies) by the projection construction:

    Q = gamma_f / conj(lam),   g* = 1/|lam|^2 - Q_{>0} / (lam gamma_f),
    err_ap = ||Q_{>0}||^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyFactor, factor_energy, kinetic_beta
from .errors import PerfectPredictionError, UnsupportedBoundaryError, UnsupportedError
from .outer import KappaConstant, OuterFactor, kappa, outer_factor_circle
from .spectral import (
    Domain,
    EnergyPolynomial,
    FrequencyGrid,
    GridFunction,
    SpectralModel,
    from_fourier,
    integrate_against,
    kolmogorov_integral,
    line_quad,
    log_density,
    prediction_variance,
)


@dataclass(frozen=True)
class ErrorTriple:
    err_na: float
    err_ap: float

    @property
    def err_a(self) -> float:
        return self.err_na + self.err_ap

    def to_json(self) -> dict:
        return {"err_na": self.err_na, "err_ap": self.err_ap, "err_a": self.err_a}


@dataclass(frozen=True, eq=False)
class AdaptiveSolution:
    model: SpectralModel
    ell: EnergyPolynomial
    g_star: GridFunction
    q_pos: GridFunction | None
    errors: ErrorTriple
    tracking_mse: float
    mean_energy: float
    factor: EnergyFactor
    perfect_prediction: bool = False
    near_degenerate: bool = False
    kappa: KappaConstant | None = None
    beta: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def grid(self) -> FrequencyGrid:
        return self.g_star.grid

    def to_json(self) -> dict:
        d = {
            "model": self.model.to_json(),
            "energy": self.ell.to_json(),
            "grid": self.grid.N,
            "errors": self.errors.to_json(),
            "tracking_mse": self.tracking_mse,
            "mean_energy": self.mean_energy,
            "factor": self.factor.to_json(),
            "perfect_prediction": self.perfect_prediction,
            "near_degenerate": self.near_degenerate,
        }
        if self.perfect_prediction:
            d["status"] = "limit of causal approximants"
        if self.beta is not None:
            d["beta"] = self.beta
        if self.kappa is not None:
            d["kappa"] = [self.kappa.value.real, self.kappa.value.imag]
        d.update(self.extra)
        return d


# ---------------------------------------------------------------------------
# Non-adaptive problem and the objective
# ---------------------------------------------------------------------------


def _energy_weight(ell: EnergyPolynomial, domain: Domain):
    def w(u):
        l2 = np.abs(ell.symbol(u, domain)) ** 2
        return l2 / (1 + l2)

    return w


def solve_nonadaptive(model: SpectralModel, ell: EnergyPolynomial, grid: FrequencyGrid | None = None):
    """Return ``(g_na, err_na)``.

    ``g_na`` is a :class:`GridFunction` on the circle and a vectorized callable
    on the line.
    """
    err_na = float(np.real(integrate_against(model, _energy_weight(ell, model.domain), grid)))
    if model.domain is Domain.CIRCLE:
        grid = grid or model.default_grid()
        l2 = np.abs(ell.symbol(grid.points, Domain.CIRCLE)) ** 2
        return GridFunction(grid, 1 / (1 + l2)), err_na

    def g_na(u):
        return 1 / (1 + np.abs(ell.symbol(u, Domain.LINE)) ** 2)

    return g_na, err_na


def objective(g, model: SpectralModel, ell: EnergyPolynomial) -> float:
    """``int (|g-1|^2 + |g|^2 |l|^2) dmu`` for a grid function or a callable."""
    if isinstance(g, GridFunction):
        u = g.grid.points
        l2 = np.abs(ell.symbol(u, Domain.CIRCLE)) ** 2
        vals = np.abs(g.values - 1) ** 2 + np.abs(g.values) ** 2 * l2
        return float(g.grid.integrate(vals * model.on_grid(g.grid)))

    def w(u):
        gu = g(u)
        return abs(gu - 1) ** 2 + abs(gu) ** 2 * abs(ell.symbol(u, model.domain)) ** 2

    return float(np.real(integrate_against(model, w)))


def split_objective(g: GridFunction, model: SpectralModel, ell: EnergyPolynomial) -> tuple[float, float]:
    """``(tracking, energy)`` parts of the objective."""
    u = g.grid.points
    f = model.on_grid(g.grid)
    l2 = np.abs(ell.symbol(u, Domain.CIRCLE)) ** 2
    tracking = float(g.grid.integrate(np.abs(g.values - 1) ** 2 * f))
    energy = float(g.grid.integrate(np.abs(g.values) ** 2 * l2 * f))
    return tracking, energy


# ---------------------------------------------------------------------------
# Adaptive problem on the circle
# ---------------------------------------------------------------------------


def project_positive(q: GridFunction) -> GridFunction:
    """Keep the strictly positive frequencies ``e^{i tau u}, tau > 0``."""
    d = q.coeffs()
    tau = q.grid.frequencies()
    d = np.where(tau > 0, d, 0)
    return GridFunction(q.grid, from_fourier(d))


def solve_adaptive_circle(
    model: SpectralModel,
    ell: EnergyPolynomial,
    grid: FrequencyGrid | None = None,
    outer: OuterFactor | None = None,
) -> AdaptiveSolution:
    if model.domain is not Domain.CIRCLE:
        raise UnsupportedError("solve_adaptive_circle needs a circle model")
    grid = grid or model.default_grid()
    lam = factor_energy(ell, Domain.CIRCLE)
    g_na, err_na = solve_nonadaptive(model, ell, grid)
    alpha = ell.kinetic_alpha(Domain.CIRCLE)
    beta = kinetic_beta(alpha) if alpha else None

    if outer is None:
        try:
            outer = outer_factor_circle(model, grid)
        except PerfectPredictionError:
            tracking, energy = split_objective(g_na, model, ell)
            return AdaptiveSolution(
                model, ell, g_na, None, ErrorTriple(err_na, 0.0), tracking, energy, lam,
                perfect_prediction=True, beta=beta,
                kappa=KappaConstant(0j, "closed-form", perfect_prediction=True) if alpha else None,
            )

    u = grid.points
    lam_u = lam(u)
    gamma = outer.values
    q = GridFunction(grid, gamma / np.conj(lam_u))
    q_pos = project_positive(q)
    err_ap = q_pos.norm2()
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 1 / np.abs(lam_u) ** 2 - q_pos.values / (lam_u * gamma)
    g = np.where(np.isfinite(g), g, g_na.values)
    g_star = GridFunction(grid, g)
    tracking, energy = split_objective(g_star, model, ell)
    k = None
    if alpha:
        k = kappa(model, alpha, grid)
    return AdaptiveSolution(
        model, ell, g_star, q_pos, ErrorTriple(err_na, err_ap), tracking, energy, lam,
        near_degenerate=outer.near_degenerate, kappa=k, beta=beta,
    )


# ---------------------------------------------------------------------------
# Closed forms for kinetic energy
# ---------------------------------------------------------------------------


def errap_kinetic_closed_form(model: SpectralModel, alpha: float, grid: FrequencyGrid | None = None) -> float:
    """Adaptivity error for kinetic energy from the exp-integral formula."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if kolmogorov_integral(model, grid) == -math.inf:
        return 0.0
    if model.domain is Domain.LINE:
        # u = tan(theta)/alpha turns alpha du / (1 + alpha^2 u^2) into d theta
        val = line_quad(lambda u: float(log_density(model.density(u))), scale=1 / alpha)
        return math.pi / alpha * math.exp(val / math.pi)
    grid = grid or model.default_grid()
    beta = kinetic_beta(alpha)
    u = grid.points
    poisson = (beta**2 - 1) / (beta**2 + 1 - 2 * beta * np.cos(u))
    val = float(grid.integrate(poisson * log_density(model.on_grid(grid))))
    return 2 * math.pi / (beta**2 * math.sqrt(1 + 4 * alpha**2)) * math.exp(val / (2 * math.pi))


def closed_form_errors(model: SpectralModel, alpha: float) -> ErrorTriple:
    """Exact error triple for the parametric families under kinetic energy."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if model.form == "ou":
        return ErrorTriple(alpha / (2 + alpha), 2 * alpha / (2 + alpha) ** 2)
    beta = kinetic_beta(alpha)
    s = math.sqrt(1 + 4 * alpha**2)
    s2 = model.sigma**2
    rho = model.rho
    r2 = abs(rho) ** 2
    if model.form == "white":
        return ErrorTriple(s2 * (1 - 1 / s), s2 / (beta**2 * s))
    if model.form == "ar1":
        err_na = s2 / (1 - r2) * (1 - (beta**2 - r2) / (s * abs(beta - rho) ** 2))
        return ErrorTriple(err_na, s2 / (s * abs(beta - rho) ** 2))
    if model.form == "ma1":
        if abs(abs(rho) - 1) < 1e-12:
            raise UnsupportedBoundaryError("MA(1) with |rho| = 1 is not supported")
        err_na = s2 * (1 + r2 - (1 + r2 + 2 * rho.real / beta) / s)
        if abs(rho) < 1:
            err_ap = s2 * abs(1 + rho / beta) ** 2 / (beta**2 * s)
        else:
            err_ap = s2 * abs(rho + 1 / beta) ** 2 / (beta**2 * s)
        return ErrorTriple(err_na, err_ap)
    raise UnsupportedError(f"no closed form for {model.form} densities")


def ou_g_star(alpha: float):
    """Optimal causal transfer function for OU under kinetic energy."""

    def g(u):
        return 2 / ((2 + alpha) * (1 + 1j * alpha * np.asarray(u, dtype=float)))

    return g


# ---------------------------------------------------------------------------
# Tradeoff sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    tracking_mse: float = math.nan
    mean_energy: float = math.nan
    err_na: float = math.nan
    err_ap: float = math.nan
    err_a: float = math.nan
    small_alpha_ratio: float = math.nan
    status: str = "ok"


def _sweep_point(model, shape, alpha, grid) -> SweepPoint:
    try:
        if model.domain is Domain.LINE:
            ell = EnergyPolynomial(tuple(alpha * c for c in shape.coeffs))
            a = ell.kinetic_alpha(Domain.LINE)
            if a is None or model.form != "ou":
                raise UnsupportedError("line sweeps support OU with kinetic energy only")
            g = ou_g_star(a)
            tracking = float(np.real(integrate_against(model, lambda u: abs(g(u) - 1) ** 2)))
            energy = float(np.real(integrate_against(model, lambda u: abs(g(u)) ** 2 * (a * u) ** 2)))
            errs = closed_form_errors(model, a)
            return SweepPoint(alpha, tracking, energy, errs.err_na, errs.err_ap, errs.err_a)
        ell = EnergyPolynomial(tuple(alpha * c for c in shape.coeffs))
        sol = solve_adaptive_circle(model, ell, grid)
        ratio = math.nan
        if ell.kinetic_alpha(Domain.CIRCLE):
            pv = prediction_variance(model, grid)
            if pv > 0:
                ratio = sol.errors.err_ap / (alpha**4 * pv)
        e = sol.errors
        return SweepPoint(alpha, sol.tracking_mse, sol.mean_energy, e.err_na, e.err_ap, e.err_a, ratio)
    except (ArithmeticError, ValueError) as exc:
        return SweepPoint(alpha, status=f"error: {exc}")


@dataclass(frozen=True)
class SweepResult:
    points: list
    tracking_monotone: bool
    shape_energy_monotone: bool


def tradeoff_sweep(
    model: SpectralModel,
    shape: EnergyPolynomial,
    alphas,
    grid: FrequencyGrid | None = None,
    workers: int = 1,
) -> SweepResult:
    """Solve for ``l = alpha * shape`` over ``alphas`` and split each error.

    Raising alpha puts more weight on energy, so tracking error cannot
    decrease and the energy per unit weight (``mean_energy / alpha^2``) cannot
    increase.  Both are reported as flags rather than enforced.
    """
    alphas = [float(a) for a in alphas]
    if not alphas or any(a <= 0 for a in alphas) or alphas != sorted(alphas):
        raise ValueError("alphas must be positive and sorted")
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            points = list(ex.map(lambda a: _sweep_point(model, shape, a, grid), alphas))
    else:
        points = [_sweep_point(model, shape, a, grid) for a in alphas]
    ok = [p for p in points if p.status == "ok"]
    slack = 1e-10
    tracking = all(b.tracking_mse >= a.tracking_mse - slack for a, b in zip(ok, ok[1:]))
    shape_energy = all(
        b.mean_energy / b.alpha**2 <= a.mean_energy / a.alpha**2 + slack for a, b in zip(ok, ok[1:])
    )
    return SweepResult(points, tracking, shape_energy)


__all__ = [
    "AdaptiveSolution",
    "ErrorTriple",
    "SweepPoint",
    "SweepResult",
    "closed_form_errors",
    "errap_kinetic_closed_form",
    "objective",
    "ou_g_star",
    "project_positive",
    "solve_adaptive_circle",
    "solve_nonadaptive",
    "split_objective",
    "tradeoff_sweep",
]
