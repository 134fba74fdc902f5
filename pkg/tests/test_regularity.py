"""
Hoelder fits, maximal moments and the regularity report
"""

import numpy as np
import pytest

from src.kernel.kernels import TemperedRiesz
from src.noise.covariance import CovarianceSpec
from src.regularity.holder import (
    estimate_holder,
    kappa_value,
    pathwise_bound,
    pathwise_holder,
    predicted_exponent,
    truncation_remainder,
)
from src.regularity.maximal import max_bound, refinement_stability, sup_moment
from src.regularity.report import build_regularity_report
from src.resolvent.grid import TimeGrid
from src.solver.ensemble import MeasurementPlan, ensemble_solve
from src.solver.maps import AdditiveIdentity, ZeroDrift
from src.solver.problem import InitialData, ProblemSpec
from src.spectral.basis import SpectralBasis
from src.utils.errors import (
    EnsembleTooSmall,
    LagOutOfRange,
    ParameterOutOfRange,
    SpectralTruncationDominates,
)


def additive(n_modes, cov, r, rule="left", rho=1.5, horizon=1.0):
    basis = SpectralBasis(n_modes)
    return ProblemSpec(
        kernel=TemperedRiesz(rho),
        basis=basis,
        cov=cov,
        f_map=ZeroDrift(basis),
        g_map=AdditiveIdentity(basis),
        u0=InitialData.zero(),
        horizon=horizon,
        r=r,
        rule=rule,
    )


@pytest.fixture(scope="module")
def trace_class_ensemble():
    grid = TimeGrid.uniform(1.0, 512)
    problem = additive(16, CovarianceSpec.power(1.0), 1.0 / 3.0)
    plan = MeasurementPlan.default(grid, (0.0,))
    return ensemble_solve(problem, grid, 2024, 400, plan=plan)


def test_predicted_exponent():
    assert kappa_value(1.0 / 3.0, 0.0, 1.5) == pytest.approx(-1.0)
    assert predicted_exponent(-1.0) == pytest.approx(0.5)
    assert predicted_exponent(-1.75) == pytest.approx(0.125)
    assert predicted_exponent(-0.5) == 0.5


def test_holder_needs_enough_lags(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 1, 4, bank=small_bank)
    with pytest.raises(LagOutOfRange):
        estimate_holder(ensemble, 0.0)
    with pytest.raises(LagOutOfRange):
        estimate_holder(ensemble, 0.0, lags=[3])


def test_holder_ceiling(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 1, 2, bank=small_bank)
    with pytest.raises(ParameterOutOfRange):
        estimate_holder(ensemble, 2.0 / 3.0)


@pytest.mark.slow
def test_holder_slope_trace_class(trace_class_ensemble):
    estimate = estimate_holder(trace_class_ensemble, 0.0)
    assert estimate.predicted == pytest.approx(0.5)
    assert estimate.passed(0.1), (estimate.slope, estimate.ci)
    assert estimate.to_dict()["pass"] is True
    assert np.all(np.diff(estimate.increments) < 0.0)


@pytest.mark.slow
def test_regularity_report(trace_class_ensemble, tmp_path):
    report = build_regularity_report(
        trace_class_ensemble, [0.0], tolerance=0.1, beta_grid=[0.1, 0.3]
    )
    assert report.passed
    row = report.summary_rows()[0]
    assert row["kappa"] == pytest.approx(-1.0)
    assert row["pass"] is True
    assert row["error"] is None
    assert row["unresolved"] is False
    assert len(report.pathwise[0.0]) == 2
    assert report.to_dict()["passed"] is True
    path = report.to_csv(str(tmp_path / "regularity.csv"), timestamp=False)
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == "s,h,D,D_sup,predicted,slope"
    assert len(lines) == 1 + len(trace_class_ensemble.plan.lags)
    report.to_gnuplot(str(tmp_path / "regularity.dat"), timestamp=False)


def test_report_records_failed_fits(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 1, 3, bank=small_bank)
    report = build_regularity_report(ensemble, [0.0])
    assert report.errors[0.0]
    assert report.verdict() == {0.0: None}
    assert not report.passed
    assert report.summary_rows()[0]["measured"] is None


def test_pathwise_needs_paths(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 1, 3, bank=small_bank)
    with pytest.raises(EnsembleTooSmall):
        pathwise_holder(ensemble, 0.0, [0.2])


def test_pathwise_quotients(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 4, 60, bank=small_bank)
    quotients = pathwise_holder(ensemble, 0.0, [0.1, 0.3], p=8)
    assert [q.beta for q in quotients] == [0.1, 0.3]
    assert quotients[0].bound == pytest.approx(0.5 - 1.0 / 8.0)
    assert quotients[0].median <= quotients[0].p95
    assert quotients[0].p95 <= quotients[1].p95
    assert quotients[0].stable
    assert set(quotients[0].to_dict()) >= {"median", "p95", "growth", "stable"}


def test_pathwise_rejects_betas_above_the_bound(
    additive_problem, small_grid, small_bank
):
    ensemble = ensemble_solve(additive_problem, small_grid, 4, 24, bank=small_bank)
    assert pathwise_bound(1.0 / 3.0, 0.0, 1.5, 2) == pytest.approx(0.0)
    with pytest.raises(ParameterOutOfRange):
        pathwise_holder(ensemble, 0.0, [0.02, 0.05])
    with pytest.raises(ParameterOutOfRange):
        pathwise_holder(ensemble, 0.0, [0.1, 0.375], p=8)


def test_pathwise_percentile_grows_above_one_half(
    additive_problem, small_grid, small_bank
):
    ensemble = ensemble_solve(additive_problem, small_grid, 4, 60, bank=small_bank)
    [quotient] = pathwise_holder(ensemble, 0.0, [1.0], p=8, allow_inadmissible=True)
    assert quotient.growth > 0.1
    assert not quotient.stable


@pytest.mark.slow
def test_report_skips_inadmissible_betas(trace_class_ensemble):
    report = build_regularity_report(
        trace_class_ensemble, [0.0], tolerance=0.1, beta_grid=[0.1, 0.4]
    )
    assert report.pathwise_skipped == {0.0: [0.4]}
    assert [q.beta for q in report.pathwise[0.0]] == [0.1]
    assert report.to_dict()["pathwise_skipped"] == {"0.0": [0.4]}


def test_refinement_stability():
    check = refinement_stability([1.0, 1.05, 1.08])
    assert check.stable and not check.diverging
    check = refinement_stability([1.0, 1.5, 2.2])
    assert check.diverging and not check.stable


def test_sup_moment(additive_problem, small_grid, small_bank):
    ensemble = ensemble_solve(additive_problem, small_grid, 6, 5, bank=small_bank)
    expected = np.mean(ensemble.norms[:, 0, :].max(axis=1) ** 2)
    assert sup_moment(ensemble, additive_problem.s0) == pytest.approx(expected)


def test_max_bound_stable_for_trace_class():
    grid = TimeGrid.uniform(1.0, 128)
    cov = CovarianceSpec.power(1.0)
    coarse = ensemble_solve(additive(16, cov, 1.0 / 3.0), grid, 3, 50)
    fine = ensemble_solve(additive(32, cov, 1.0 / 3.0), grid, 3, 50)
    bound = max_bound(coarse, 0.0, refined_modes=[fine])
    assert bound.stable
    assert not bound.complete
    assert bound.to_dict()["refinement_modes"]["stable"] is True


def test_max_bound_stable_under_step_doubling():
    cov = CovarianceSpec.power(1.0)
    problem = additive(16, cov, 1.0 / 3.0)
    grid = TimeGrid.uniform(1.0, 128)
    coarse = ensemble_solve(problem, grid, 3, 100)
    fine_steps = ensemble_solve(
        problem, TimeGrid.uniform(1.0, 256), 3, 100, bridge_levels=1
    )
    fine_modes = ensemble_solve(additive(32, cov, 1.0 / 3.0), grid, 3, 100)
    bound = max_bound(
        coarse, 0.0, refined_modes=[fine_modes], refined_steps=[fine_steps]
    )
    assert bound.complete
    assert bound.checks["steps"].stable, bound.checks["steps"].changes
    assert bound.stable
    assert bound.to_dict()["refinement_steps"]["stable"] is True


def test_max_bound_without_refinement_has_no_verdict(
    additive_problem, small_grid, small_bank
):
    ensemble = ensemble_solve(additive_problem, small_grid, 6, 5, bank=small_bank)
    bound = max_bound(ensemble, additive_problem.s0)
    assert bound.stable is None
    assert bound.to_dict()["stable"] is None


def test_max_bound_diverges_for_white_noise_above_the_ceiling():
    grid = TimeGrid.uniform(1.0, 128)
    cov = CovarianceSpec.white()
    plan = MeasurementPlan.default(grid, (0.5,))
    ensembles = [
        ensemble_solve(
            additive(n, cov, -1.0 / 6.0, rule="local"), grid, 8, 50, plan=plan
        )
        for n in (16, 32, 64)
    ]
    bound = max_bound(ensembles[0], 0.5, refined_modes=ensembles[1:])
    assert bound.diverging
    assert not bound.stable


def test_truncation_dominates_white_noise_on_a_small_basis():
    grid = TimeGrid.uniform(1.0, 512)
    problem = additive(16, CovarianceSpec.white(), -1.0 / 6.0, rule="local")
    plan = MeasurementPlan.default(grid, (0.0,))
    ensemble = ensemble_solve(problem, grid, 12, 30, plan=plan)
    remainder = truncation_remainder(ensemble, 0.0)
    assert 0.0 < remainder < np.inf
    with pytest.raises(SpectralTruncationDominates):
        estimate_holder(ensemble, 0.0, strict=False)
    report = build_regularity_report(ensemble, [0.0])
    assert 0.0 in report.unresolved
    assert report.summary_rows()[0]["unresolved"] is True
    assert report.verdict() == {0.0: None}
    assert report.passed


def test_truncation_remainder_is_small_for_trace_class(
    additive_problem, small_grid, small_bank, nemytskii_problem
):
    ensemble = ensemble_solve(additive_problem, small_grid, 2, 4, bank=small_bank)
    remainder = truncation_remainder(ensemble, 0.0)
    finest = np.mean(ensemble.increments[:, 0, -1, :] ** 2)
    assert 0.0 < remainder < 0.05 * finest
    nonlinear = ensemble_solve(nemytskii_problem, small_grid, 2, 2, bank=small_bank)
    assert truncation_remainder(nonlinear, nemytskii_problem.s0) == 0.0


@pytest.mark.slow
def test_white_noise_slope_at_resolved_mode_count():
    grid = TimeGrid.uniform(1.0, 512)
    problem = additive(2048, CovarianceSpec.white(), -1.0 / 6.0, rule="local")
    plan = MeasurementPlan.default(grid, (0.0, 0.1))
    ensemble = ensemble_solve(problem, grid, 20240503, 100, plan=plan)
    estimate = estimate_holder(ensemble, 0.0)
    assert estimate.predicted == pytest.approx(0.125)
    assert abs(estimate.slope - 0.125) <= 0.05, (estimate.slope, estimate.ci)
    assert estimate.to_dict()["truncation_share"] <= 0.25
    with pytest.raises(SpectralTruncationDominates):
        estimate_holder(ensemble, 0.1)


@pytest.mark.slow
@pytest.mark.parametrize("rho", [1.1, 1.05])
def test_slope_approaches_one_half_as_rho_tends_to_one(rho):
    horizon = 1.0 / 64.0
    grid = TimeGrid.uniform(horizon, 512)
    cov = CovarianceSpec.power(1.0)
    problem = additive(16, cov, 1.0 - 1.0 / rho, rho=rho, horizon=horizon)
    assert problem.s0 == pytest.approx(0.0)
    plan = MeasurementPlan.default(grid, (0.0,))
    ensemble = ensemble_solve(problem, grid, 77, 400, plan=plan)
    estimate = estimate_holder(ensemble, 0.0)
    assert estimate.predicted == pytest.approx(0.5)
    assert abs(estimate.slope - 0.5) <= 0.05, (estimate.slope, estimate.ci)
