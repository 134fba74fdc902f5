"""
Subcommands: build the experiment from a validated config, run it, write the artefacts
"""

import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.cli.config_loader import (
    DiscretizationConfig,
    ExperimentConfig,
    KernelConfig,
    NoiseConfig,
    describe,
)
from src.kernel.assumptions import AssumptionReport, certify_kernel
from src.kernel.kernels import (
    FiniteHistory,
    KernelSpec,
    LaplaceDefined,
    Tabulated,
    TemperedRiesz,
)
from src.noise.covariance import CovarianceSpec
from src.regularity.report import RegularityReport, build_regularity_report
from src.resolvent.estimates import NORM_NAMES, ScalingReport, verify_scalar_estimates
from src.resolvent.grid import TimeGrid
from src.resolvent.mittag_leffler import riesz_resolvent
from src.solver.ensemble import EnsembleResult, MeasurementPlan, ensemble_solve
from src.solver.maps import (
    AdditiveIdentity,
    DiagonalLinear,
    DiagonalMultiplicative,
    FMap,
    GMap,
    NemytskiiDrift,
    NemytskiiMultiplicative,
    ZeroDrift,
    ZeroNoise,
)
from src.solver.problem import InitialData, ProblemSpec
from src.spectral.bank import build_resolvent_bank, integrated_bound
from src.spectral.basis import SpectralBasis
from src.spectral.smoothing import SmoothingFit, measure_smoothing
from src.utils.errors import ParameterOutOfRange, VerificationFailure
from src.utils.io import write_csv, write_gnuplot, write_json
from src.utils.log import get_logger

logger = get_logger(__name__)

DEFAULT_MU_GRID = tuple(float(mu) for mu in np.geomspace(1.0, 1e4, 9))


# -- building blocks from config sections -------------------------------------


def build_kernel(cfg: KernelConfig) -> KernelSpec:
    if cfg.variant == "tempered-riesz":
        return TemperedRiesz(cfg.rho, cfg.eta)
    if cfg.variant == "finite-history":
        return FiniteHistory(cfg.rho)
    if cfg.variant == "tabulated":
        return Tabulated(cfg.times, cfg.values, cfg.rho)
    return LaplaceDefined.example(cfg.exponent, cfg.weight, cfg.power)


def build_grid(cfg: DiscretizationConfig) -> TimeGrid:
    if cfg.grid == "graded":
        return TimeGrid.graded(cfg.horizon, cfg.steps, cfg.grading)
    return TimeGrid.uniform(cfg.horizon, cfg.steps)


def build_covariance(cfg: NoiseConfig) -> CovarianceSpec:
    if cfg.covariance == "power":
        return CovarianceSpec.power(cfg.gamma)
    if cfg.covariance == "custom":
        return CovarianceSpec.custom(cfg.values)
    return CovarianceSpec.white()


def _f_map(config: ExperimentConfig, basis: SpectralBasis) -> FMap:
    problem = config.problem
    if problem.F == "diagonal-linear":
        return DiagonalLinear(basis, _per_mode(problem.F_coefficients, basis))
    if problem.F == "nemytskii":
        return NemytskiiDrift(basis, problem.F_function, problem.F_lipschitz)
    return ZeroDrift(basis)


def _g_map(config: ExperimentConfig, basis: SpectralBasis) -> GMap:
    problem = config.problem
    if problem.G == "additive":
        return AdditiveIdentity(basis)
    if problem.G == "diagonal-multiplicative":
        return DiagonalMultiplicative(basis, _per_mode(problem.G_coefficients, basis))
    if problem.G == "nemytskii":
        return NemytskiiMultiplicative(basis, problem.G_function, problem.G_lipschitz)
    return ZeroNoise(basis)


def _per_mode(values: Tuple[float, ...], basis: SpectralBasis) -> np.ndarray:
    """A single value applies to every mode; a list is padded with its last entry"""
    out = np.full(basis.n_modes, values[-1], dtype=float)
    n = min(len(values), basis.n_modes)
    out[:n] = values[:n]
    return out


def build_problem(
    config: ExperimentConfig,
    kernel: Optional[KernelSpec] = None,
    modes: Optional[int] = None,
) -> ProblemSpec:
    kernel = kernel or build_kernel(config.kernel)
    basis = SpectralBasis(modes or config.discretization.modes)
    problem = config.problem
    if problem.u0 == "mode":
        u0 = InitialData.from_modes(problem.u0_modes)
    elif problem.u0 == "random":
        u0 = InitialData.random(problem.u0_decay)
    else:
        u0 = InitialData.zero()
    return ProblemSpec(
        kernel=kernel,
        basis=basis,
        cov=build_covariance(config.noise),
        f_map=_f_map(config, basis),
        g_map=_g_map(config, basis),
        u0=u0,
        horizon=config.discretization.horizon,
        r=problem.r,
        rho=config.kernel.rho,
        p=problem.p,
        rule=config.noise.rule,
    )


# -- run context --------------------------------------------------------------


@dataclass
class RunContext:
    """Output location and bookkeeping shared by the stages of one run"""

    config: ExperimentConfig
    output: str
    threads: Optional[int] = None
    timestamp: bool = True
    failures: List[str] = field(default_factory=list)
    summary: List[Dict[str, object]] = field(default_factory=list)

    def path(self, *parts: str) -> str:
        target = os.path.join(self.output, *parts)
        os.makedirs(os.path.dirname(target), exist_ok=True)
        return target

    def wants(self, fmt: str) -> bool:
        return fmt in self.config.output.formats

    def json(self, name: str, payload: Any) -> None:
        if self.wants("json"):
            write_json(self.path(name), payload)

    def csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> None:
        if self.wants("csv"):
            write_csv(self.path(name), header, rows, timestamp=self.timestamp)

    def record(
        self,
        stage: str,
        quantity: str,
        measured: Any,
        predicted: Any,
        passed: Optional[bool],
    ) -> None:
        self.summary.append({
            "stage": stage,
            "quantity": quantity,
            "measured": measured,
            "predicted": predicted,
            "pass": passed,
        })
        if passed is False:
            self.failures.append(
                f"{stage}: {quantity} measured {measured!r}, predicted {predicted!r}"
            )

    def check(self) -> None:
        if self.failures:
            raise VerificationFailure("; ".join(self.failures))


# -- stages ---------------------------------------------------------------------


def run_certify(ctx: RunContext) -> AssumptionReport:
    kernel = build_kernel(ctx.config.kernel)
    logger.info("stage certify-kernel: %r", kernel)
    report = certify_kernel(kernel)
    ctx.json("assumptions.json", report.to_dict())
    sector_ok = report.verdict["sector"]
    ctx.record("certify-kernel", "rho_sector", report.rho_sector, None, sector_ok)
    growth_ok = report.growth.passed_first and report.growth.passed_second
    ctx.record("certify-kernel", "rho_growth", report.rho_growth, kernel.rho, growth_ok)
    if not report.passed:
        failed = [name for name, ok in report.verdict.items() if ok is False]
        ctx.failures.append(f"certify-kernel: failed conditions {', '.join(failed)}")
    logger.info("stage certify-kernel done: %s", "pass" if report.passed else "fail")
    return report


def run_scalar(ctx: RunContext) -> ScalingReport:
    config = ctx.config
    kernel = build_kernel(config.kernel)
    disc = config.discretization
    grid = TimeGrid.graded(disc.scalar_horizon, disc.scalar_steps, disc.grading)
    mus = config.measurement.mu_grid or DEFAULT_MU_GRID
    tolerance = config.measurement.slope_tolerance
    logger.info(
        "stage scalar-resolvent: %d values of mu on %s", len(mus), grid.describe()
    )
    report = verify_scalar_estimates(
        kernel, mus, grid, threads=ctx.threads, keep_tables=True
    )

    if ctx.wants("csv"):
        for mu, table in zip(report.mus, report.tables):
            path = ctx.path("scalar", f"resolvent_mu_{mu:.6g}.csv")
            table.to_csv(path, timestamp=ctx.timestamp)
    payload = report.to_dict(tolerance)
    if isinstance(kernel, TemperedRiesz) and kernel.eta == 0.0:
        payload["mittag_leffler_error"] = [
            float(np.max(np.abs(table.s - riesz_resolvent(kernel.rho, mu, table.t))))
            for mu, table in zip(report.mus, report.tables)
        ]
    ctx.json("scaling.json", payload)
    if ctx.wants("gnuplot"):
        rows = [
            [mu] + [report.norms[name][m] for name in NORM_NAMES]
            for m, mu in enumerate(report.mus)
        ]
        write_gnuplot(
            ctx.path("scaling.dat"),
            ("mu",) + NORM_NAMES,
            [rows],
            timestamp=ctx.timestamp,
        )

    for name in NORM_NAMES:
        slope, target = report.fits[name].slope, report.targets[name]
        ok = abs(slope - target) <= tolerance
        ctx.record("scalar-resolvent", f"mu-slope {name}", slope, target, ok)
    sup = float(report.sup_norms.max())
    ctx.record("scalar-resolvent", "sup |s|", sup, 1.0, report.contraction)
    logger.info("stage scalar-resolvent done")
    return report


def run_smoothing(ctx: RunContext) -> List[SmoothingFit]:
    config = ctx.config
    kernel = build_kernel(config.kernel)
    rho = kernel.rho
    disc = config.discretization
    basis = SpectralBasis(disc.smoothing_modes)
    grid = TimeGrid.uniform(disc.horizon, disc.steps)
    tolerance = config.measurement.slope_tolerance
    logger.info("stage smoothing: %d modes", basis.n_modes)
    bank = build_resolvent_bank(kernel, basis, grid, threads=ctx.threads)

    s_values = config.measurement.smoothing_s or (0.5 / rho, 1.0 / rho)
    requests = [(s, estimate) for s in s_values for estimate in ("S", "Sdot")]
    requests.append((1.0, "Sdot_neg"))
    fits: List[SmoothingFit] = []
    for s, estimate in requests:
        try:
            fits.append(measure_smoothing(bank, s, estimate))
        except ParameterOutOfRange as exc:
            logger.warning("smoothing %s s=%s skipped: %s", estimate, s, exc)
    bound = integrated_bound(bank)

    ctx.json("smoothing.json", {
        "modes": basis.n_modes,
        "fits": [fit.to_dict() for fit in fits],
        "integrated_bound": bound.to_dict(),
    })
    if ctx.wants("gnuplot") and fits:
        write_gnuplot(
            ctx.path("smoothing.dat"),
            ("t", "norm"),
            [list(zip(fit.times, fit.norms)) for fit in fits],
            timestamp=ctx.timestamp,
            titles=[
                f"{fit.estimate} s={fit.s:.6g} slope={fit.slope:.6g}" for fit in fits
            ],
        )
    for fit in fits:
        ctx.record(
            "smoothing",
            f"{fit.estimate} s={fit.s:.6g}",
            fit.slope,
            fit.predicted,
            fit.passed(tolerance),
        )
    ctx.record(
        "smoothing", "integrated bound spread", bound.spread, bound.factor, bound.passed
    )
    logger.info("stage smoothing done")
    return fits


def _plan(
    config: ExperimentConfig, problem: ProblemSpec, grid: TimeGrid
) -> MeasurementPlan:
    plan = MeasurementPlan.default(grid, config.measurement.s_values or (problem.s0,))
    if config.measurement.lags:
        factor = grid.steps // config.discretization.steps
        lags = tuple(lag * factor for lag in config.measurement.lags)
        plan = replace(plan, lags=lags)
    return plan


def _ensemble(
    config: ExperimentConfig,
    ctx: RunContext,
    modes: Optional[int] = None,
    bridge_levels: int = 0,
) -> EnsembleResult:
    """Ensemble of the config; bridge_levels > 0 halves every step that many times"""
    problem = build_problem(config, modes=modes)
    disc = config.discretization
    grid = build_grid(replace(disc, steps=disc.steps * 2 ** bridge_levels))
    noise = config.noise
    return ensemble_solve(
        problem,
        grid,
        seed=noise.seed,
        n_paths=noise.paths,
        alpha=config.measurement.alpha,
        tol=config.measurement.tol,
        plan=_plan(config, problem, grid),
        threads=ctx.threads,
        bridge_levels=bridge_levels,
    )


def run_simulate(ctx: RunContext) -> EnsembleResult:
    config = ctx.config
    noise = config.noise
    logger.info("stage simulate: %d paths, seed %d", noise.paths, noise.seed)
    ensemble = _ensemble(config, ctx)
    if ctx.wants("csv"):
        ensemble.to_csv(ctx.path("ensemble.csv"), timestamp=ctx.timestamp)
    ctx.json("simulate.json", {
        "problem": ensemble.problem.describe(),
        "summary": ensemble.summary(),
        "first_certificate": ensemble.certificates[0].to_dict(),
    })
    logger.info("stage simulate done: %s", ensemble.summary())
    return ensemble


def run_holder(
    ctx: RunContext, ensemble: Optional[EnsembleResult] = None
) -> RegularityReport:
    config = ctx.config
    measurement = config.measurement
    ensemble = ensemble or run_simulate(ctx)
    refined_modes: Tuple[EnsembleResult, ...] = ()
    refined_steps: Tuple[EnsembleResult, ...] = ()
    if measurement.refine:
        modes = 2 * config.discretization.modes
        logger.info(
            "refined ensembles for the maximal bound: %d modes, then %d steps",
            modes,
            2 * config.discretization.steps,
        )
        refined_modes = (_ensemble(config, ctx, modes=modes),)
        refined_steps = (_ensemble(config, ctx, bridge_levels=1),)
    s_values = ensemble.plan.s_values
    logger.info("stage holder: s in %s", list(s_values))
    report = build_regularity_report(
        ensemble,
        s_values,
        p=config.problem.p,
        tolerance=measurement.slope_tolerance,
        refined_modes=refined_modes,
        refined_steps=refined_steps,
        beta_grid=measurement.beta_grid,
        pathwise_p=measurement.pathwise_p,
    )
    ctx.json("regularity.json", report.to_dict())
    if ctx.wants("csv"):
        report.to_csv(ctx.path("regularity.csv"), timestamp=ctx.timestamp)
    if ctx.wants("gnuplot"):
        report.to_gnuplot(ctx.path("regularity.dat"), timestamp=ctx.timestamp)
    for row in report.summary_rows():
        quantity = f"exponent s={row['s']:.6g}"
        if row["unresolved"]:
            ctx.record("holder", quantity, None, row["predicted"], None)
            continue
        if row["measured"] is None:
            ctx.failures.append(
                f"holder: s={row['s']:.6g} not measured ({row['error']})"
            )
            continue
        ctx.record(
            "holder", quantity, row["measured"], row["predicted"], row["pass"]
        )
    for s, bound in sorted(report.max_bounds.items()):
        ctx.record("holder", f"max bound s={s:.6g}", bound.value, None, bound.stable)
    for s, quotients in sorted(report.pathwise.items()):
        for q in quotients:
            quantity = f"pathwise s={s:.6g} beta={q.beta:.6g}"
            ctx.record("holder", quantity, q.p95, q.bound, q.stable)
    logger.info("stage holder done: %s", "pass" if report.passed else "fail")
    return report


def run_full_report(ctx: RunContext) -> None:
    kernel = build_kernel(ctx.config.kernel)
    run_certify(ctx)
    if kernel.has_time_domain:
        run_scalar(ctx)
        run_smoothing(ctx)
        run_holder(ctx)
    else:
        logger.info(
            "kernel has no time-domain evaluator; "
            "resolvent and simulation stages skipped"
        )
    ctx.json("summary.json", {
        "config": describe(ctx.config),
        "results": ctx.summary,
        "failures": ctx.failures,
    })
    ctx.csv(
        "summary.csv",
        ("stage", "quantity", "measured", "predicted", "pass"),
        (
            [r["stage"], r["quantity"], r["measured"], r["predicted"], r["pass"]]
            for r in ctx.summary
        ),
    )


COMMANDS: Dict[str, Callable[[RunContext], object]] = {
    "certify-kernel": run_certify,
    "scalar-resolvent": run_scalar,
    "smoothing": run_smoothing,
    "simulate": run_simulate,
    "holder": run_holder,
    "full-report": run_full_report,
}

# simulate has nothing to verify
VERIFYING = ("certify-kernel", "scalar-resolvent", "smoothing", "holder", "full-report")


def run(subcommand: str, ctx: RunContext) -> int:
    """Run one subcommand; VerificationFailure comes after every artefact is written"""
    if subcommand not in COMMANDS:
        raise ParameterOutOfRange(f"unknown subcommand {subcommand!r}")
    COMMANDS[subcommand](ctx)
    if subcommand in VERIFYING:
        ctx.check()
    return 0
