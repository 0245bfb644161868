"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numerical or statistical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .energy import causal_inverse, factor_energy, kinetic_beta
from .errors import NumericalError
from .filters import causal_taps, nonadaptive_taps, ou_causal_kernel
from .outer import kappa
from .simulate import DEFAULT_SEED, monte_carlo, ou_discretization_study
from .solver import (
    closed_form_errors,
    errap_kinetic_closed_form,
    solve_adaptive_circle,
    solve_nonadaptive,
    tradeoff_sweep,
)
from .spectral import DEFAULT_GRID_SIZE, Domain, EnergyPolynomial, FrequencyGrid, SpectralModel

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
Z_LIMIT = 4.0


@dataclass
class RunConfig:
    command: str
    model: dict = field(default_factory=lambda: {"form": "white"})
    energy: dict = field(default_factory=lambda: {"kinetic": 1.0})
    grid: int | None = None
    seed: int = DEFAULT_SEED
    n: int = 1_000_000
    reps: int = 8
    alphas: list = field(default_factory=list)
    deltas: list = field(default_factory=lambda: [0.5, 0.1, 0.02, 0.004])
    lags: int | None = None
    nonadaptive: bool = False
    workers: int = 1
    out: str | None = None

    def spectral_model(self) -> SpectralModel:
        return SpectralModel.from_json(self.model)

    def energy_polynomial(self, domain: Domain) -> EnergyPolynomial:
        if "kinetic" in self.energy:
            alpha = float(self.energy["kinetic"])
            if not alpha > 0:
                raise ValueError("alpha must be positive")
            return EnergyPolynomial.kinetic(alpha, domain)
        if "coeffs" in self.energy:
            return EnergyPolynomial(tuple(_complex(c) for c in self.energy["coeffs"]))
        raise ValueError("energy needs 'kinetic' or 'coeffs'")

    def frequency_grid(self, model: SpectralModel) -> FrequencyGrid:
        if self.grid is not None:
            return FrequencyGrid(int(self.grid))
        if model.form == "tabulated":
            return model.default_grid()
        return FrequencyGrid(int(os.environ.get("ESA_GRID", DEFAULT_GRID_SIZE)))


def _complex(c) -> complex:
    if isinstance(c, (list, tuple)):
        return complex(c[0], c[1] if len(c) > 1 else 0.0)
    if isinstance(c, str):
        return complex(c.replace(" ", ""))
    return complex(c)


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _cplx(z: complex) -> list:
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def run_solve(cfg: RunConfig) -> tuple[int, dict]:
    model = cfg.spectral_model()
    ell = cfg.energy_polynomial(model.domain)
    alpha = ell.kinetic_alpha(model.domain)
    report: dict = {"command": "solve", "model": model.to_json(), "energy": ell.to_json()}

    if model.domain is Domain.LINE:
        if alpha is None or model.form != "ou":
            raise ValueError("line-domain solves support OU with kinetic energy only")
        closed = closed_form_errors(model, alpha)
        _, err_na_quad = solve_nonadaptive(model, ell)
        err_ap_quad = errap_kinetic_closed_form(model, alpha)
        k = kappa(model, alpha)
        kern = ou_causal_kernel(alpha)
        report.update(
            method="closed-form",
            errors=closed.to_json(),
            kappa=_cplx(k.value),
            cross_checks={
                "err_na_quadrature": err_na_quad,
                "err_ap_exp_integral": err_ap_quad,
                "kappa_boundary_integral": _cplx(k.alternatives["boundary-integral"]),
            },
            deltas={
                "err_na": abs(err_na_quad - closed.err_na),
                "err_ap": abs(err_ap_quad - closed.err_ap),
                "kappa": abs(k.alternatives["boundary-integral"] - k.value),
            },
            kernel={"gain": kern.gain, "decay": kern.decay},
            perfect_prediction=False,
        )
        return EXIT_OK, report

    grid = cfg.frequency_grid(model)
    sol = solve_adaptive_circle(model, ell, grid)
    report.update(sol.to_json())
    report["command"] = "solve"
    report["method"] = "projection"
    if alpha is not None:
        checks = {"err_ap_exp_integral": errap_kinetic_closed_form(model, alpha, grid)}
        deltas = {"err_ap_exp_integral": abs(checks["err_ap_exp_integral"] - sol.errors.err_ap)}
        if model.is_parametric:
            closed = closed_form_errors(model, alpha)
            checks["closed_form"] = closed.to_json()
            deltas["err_na_closed_form"] = abs(closed.err_na - sol.errors.err_na)
            deltas["err_ap_closed_form"] = abs(closed.err_ap - sol.errors.err_ap)
        if sol.kappa is not None and sol.kappa.alternatives:
            deltas["kappa_spread"] = sol.kappa.max_relative_spread()
        report["cross_checks"] = checks
        report["deltas"] = deltas
    return EXIT_OK, report


def run_factor(cfg: RunConfig, domain: Domain) -> tuple[int, dict]:
    ell = cfg.energy_polynomial(domain)
    lam = factor_energy(ell, domain)
    report = {"command": "factor", "energy": ell.to_json(), "factor": lam.to_json()}
    alpha = ell.kinetic_alpha(domain)
    if alpha is not None and domain is Domain.CIRCLE:
        report["beta"] = kinetic_beta(alpha)
    if domain is Domain.CIRCLE:
        exp = causal_inverse(lam, 1e-12)
        report["causal_inverse"] = {
            "coeffs": [_cplx(c) for c in exp.coeffs],
            "tail_bound": exp.tail_bound,
        }
    elif lam.roots:
        kern = causal_inverse(lam)
        report["causal_inverse"] = {
            "weights": [_cplx(w) for w in kern.weights],
            "exponents": [_cplx(1j * r) for r in kern.roots],
        }
    return EXIT_OK, report


def run_taps(cfg: RunConfig) -> tuple[int, str, str]:
    """Returns (exit code, text, format) with format 'csv' or 'json'."""
    model = cfg.spectral_model()
    ell = cfg.energy_polynomial(model.domain)
    alpha = ell.kinetic_alpha(model.domain)
    if model.domain is Domain.LINE:
        if alpha is None:
            raise ValueError("line-domain kernels need kinetic energy")
        kern = nonadaptive_taps(alpha, Domain.LINE) if cfg.nonadaptive else ou_causal_kernel(alpha)
        return EXIT_OK, kern.to_json(), "json"
    if cfg.nonadaptive:
        if alpha is None:
            raise ValueError("closed-form two-sided taps need kinetic energy")
        return EXIT_OK, nonadaptive_taps(alpha, Domain.CIRCLE, cfg.lags).to_csv(), "csv"
    sol = solve_adaptive_circle(model, ell, cfg.frequency_grid(model))
    return EXIT_OK, causal_taps(sol, cfg.lags).to_csv(), "csv"


def run_simulate(cfg: RunConfig) -> tuple[int, str, dict]:
    if cfg.reps < 1:
        raise ValueError("reps must be at least 1")
    if cfg.n < 1:
        raise ValueError("n must be positive")
    model = cfg.spectral_model()
    if model.domain is not Domain.CIRCLE or not model.is_parametric:
        raise ValueError("simulation needs a parametric circle model")
    ell = cfg.energy_polynomial(model.domain)
    res = monte_carlo(model, ell, cfg.n, cfg.reps, cfg.seed, cfg.frequency_grid(model), workers=cfg.workers)
    summary = res.summary()
    zs = [summary["z_scores"].get("total", 0.0)] + [z for z in summary["replicate_z_scores"] if z is not None]
    ok = all(abs(z) <= Z_LIMIT for z in zs)
    summary["pass"] = ok
    return (EXIT_OK if ok else EXIT_NUMERIC), res.replicates_csv(), summary


def run_sweep(cfg: RunConfig) -> tuple[int, str]:
    if not cfg.alphas:
        raise ValueError("sweep needs a nonempty alpha list")
    model = cfg.spectral_model()
    if "kinetic" in cfg.energy:
        shape = EnergyPolynomial.kinetic(1.0, model.domain)
    else:
        shape = cfg.energy_polynomial(model.domain)
    grid = cfg.frequency_grid(model) if model.domain is Domain.CIRCLE else None
    res = tradeoff_sweep(model, shape, sorted(cfg.alphas), grid, workers=cfg.workers)
    rows = [
        "alpha,tracking_mse,mean_energy,err_na,err_ap,err_a,small_alpha_ratio,"
        "tracking_monotone,shape_energy_monotone,status"
    ]
    for p in res.points:
        rows.append(
            f"{p.alpha!r},{p.tracking_mse!r},{p.mean_energy!r},{p.err_na!r},{p.err_ap!r},"
            f"{p.err_a!r},{p.small_alpha_ratio!r},{int(res.tracking_monotone)},"
            f"{int(res.shape_energy_monotone)},{p.status}"
        )
    code = EXIT_OK if all(p.status == "ok" for p in res.points) else EXIT_NUMERIC
    return code, "\n".join(rows) + "\n"


def run_study(cfg: RunConfig) -> tuple[int, str]:
    alpha = float(cfg.energy.get("kinetic", 1.0))
    rows = ["delta,err_a,limit,gap"]
    for r in ou_discretization_study(alpha, cfg.deltas):
        rows.append(f"{r.delta!r},{r.err_a!r},{r.limit!r},{r.gap!r}")
    return EXIT_OK, "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esa", description="Adaptive least-energy approximation of stationary processes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sweep=False):
        p.add_argument("--config", help="JSON run configuration; flags override it")
        p.add_argument("--model", choices=["white", "ar1", "ma1", "ou"])
        p.add_argument("--rho", help="real or complex, e.g. 0.5 or 0.3+0.4j")
        p.add_argument("--sigma", type=float)
        if sweep:
            p.add_argument("--alpha", help="comma-separated alpha list")
        else:
            p.add_argument("--alpha", type=float, help="kinetic energy scale")
        p.add_argument("--energy-coeffs", help="comma-separated coefficients l_0,...,l_M")
        p.add_argument("--grid", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--workers", type=int)

    common(sub.add_parser("solve", help="optimal adaptive approximation and its errors"))
    p = sub.add_parser("factor", help="factorize the energy symbol")
    common(p)
    p.add_argument("--domain", choices=["circle", "line"])
    p = sub.add_parser("taps", help="time-domain filter weights")
    common(p)
    p.add_argument("--lags", type=int)
    p.add_argument("--nonadaptive", action="store_true", default=None)
    p = sub.add_parser("simulate", help="Monte Carlo validation")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    common(sub.add_parser("sweep", help="energy/tracking tradeoff over alpha"), sweep=True)
    p = sub.add_parser("study", help="OU discretization study")
    common(p)
    p.add_argument("--delta-list", help="comma-separated decreasing steps")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
    data["command"] = args.command
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**data)

    model = dict(cfg.model)
    if args.model:
        model = {"form": args.model}
        if args.model == "ou":
            model["domain"] = "line"
    if args.rho is not None:
        z = _complex(args.rho)
        model["rho"] = [z.real, z.imag]
    if args.sigma is not None:
        model["sigma"] = args.sigma
    cfg.model = model

    if args.command == "sweep":
        if args.alpha:
            cfg.alphas = _floats(args.alpha)
        if args.energy_coeffs:
            cfg.energy = {"coeffs": [_complex(c) for c in args.energy_coeffs.split(",")]}
        elif "kinetic" not in cfg.energy and "coeffs" not in cfg.energy:
            cfg.energy = {"kinetic": 1.0}
    elif args.energy_coeffs:
        cfg.energy = {"coeffs": [_complex(c) for c in args.energy_coeffs.split(",")]}
    elif args.alpha is not None:
        cfg.energy = {"kinetic": args.alpha}

    for name in ("grid", "seed", "out", "workers", "n", "reps", "lags", "nonadaptive"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "delta_list", None):
        cfg.deltas = _floats(args.delta_list)
    return cfg


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command == "solve":
            code, report = run_solve(cfg)
            _emit(_json(report), cfg.out)
        elif cfg.command == "factor":
            domain = Domain(args.domain) if args.domain else (
                Domain.LINE if cfg.model.get("form") == "ou" else Domain.CIRCLE
            )
            code, report = run_factor(cfg, domain)
            _emit(_json(report), cfg.out)
        elif cfg.command == "taps":
            code, text, _ = run_taps(cfg)
            _emit(text, cfg.out)
        elif cfg.command == "simulate":
            code, csv_text, summary = run_simulate(cfg)
            if cfg.out:
                out = Path(cfg.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / "replicates.csv").write_text(csv_text)
                (out / "summary.json").write_text(_json(summary))
            else:
                sys.stdout.write(csv_text)
                sys.stdout.write(_json(summary))
        elif cfg.command == "sweep":
            code, text = run_sweep(cfg)
            _emit(text, cfg.out)
        else:
            code, text = run_study(cfg)
            _emit(text, cfg.out)
        return code
    except NumericalError as exc:
        print(f"esa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"esa: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
