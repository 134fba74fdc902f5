"""
Kernel certification: sector, regularity, growth and time-domain conditions
"""

import math

import numpy as np
import pytest

from src.kernel.assumptions import (
    ContourSampling,
    b_smooth_ratio,
    certify_kernel,
    check_b_smooth,
    check_growth_conditions,
    check_k_regularity,
    check_monotonicity,
    growth_integrals,
    l1_norm_scaling,
    lp_integrability,
    scan_growth_candidates,
    sector_angle,
)
from src.kernel.kernels import FiniteHistory, LaplaceDefined, Tabulated, TemperedRiesz
from src.utils.errors import ParameterOutOfRange


@pytest.mark.parametrize("rho", [1.2, 1.5, 1.8])
def test_riesz_sector_matches_rho(rho):
    angle, rho_sector = sector_angle(TemperedRiesz(rho))
    assert angle == pytest.approx((rho - 1.0) * math.pi / 2.0, abs=1e-3)
    assert rho_sector == pytest.approx(rho, abs=1e-3)


def test_near_one_sector_collapses():
    _, rho_sector = sector_angle(TemperedRiesz(1.001))
    assert rho_sector == pytest.approx(1.0, abs=2e-3)


def test_laplace_example_sector():
    _, rho_sector = sector_angle(LaplaceDefined.example())
    assert rho_sector == pytest.approx(1.874, abs=0.01)


def test_riesz_regularity_constants(riesz):
    result = check_k_regularity(riesz, order=2)
    assert result.constants[0] == 1.0
    assert result.constants[1] == pytest.approx(0.5, rel=1e-10)
    assert result.constants[2] == pytest.approx(0.75, rel=1e-10)
    assert result.passed


def test_regularity_order_bounds(riesz):
    with pytest.raises(ParameterOutOfRange):
        check_k_regularity(riesz, order=4)


def test_finite_history_regularity_is_finite():
    sampling = ContourSampling(n_angles=3, n_radii=8, n_axis=12)
    result = check_k_regularity(FiniteHistory(1.4), order=2, sampling=sampling)
    assert all(math.isfinite(v) for v in result.constants.values())


def test_riesz_growth_products_are_scale_invariant(riesz):
    report = check_growth_conditions(riesz, rho_candidate=1.5)
    assert report.passed
    assert report.first_ratio < 1.01
    assert report.second_ratio < 1.01
    assert abs(report.first_drift) < 1e-3
    assert abs(report.second_drift) < 1e-3


def test_growth_needs_four_decades(riesz):
    with pytest.raises(ParameterOutOfRange):
        check_growth_conditions(riesz, mu_grid=[1e3, 1e4, 1e5])


def test_riesz_growth_exponent(riesz):
    assert growth_integrals(riesz).rho_growth() == pytest.approx(1.5, abs=0.01)


def test_laplace_example_growth_boundary():
    kernel = LaplaceDefined.example()
    candidates = [round(1.35 + 0.01 * i, 2) for i in range(11)]
    verdicts = scan_growth_candidates(kernel, candidates)
    accepted = [rho for rho in candidates if verdicts[rho]]
    assert accepted, "no candidate accepted"
    assert min(accepted) <= 1.4 <= max(accepted)
    assert max(accepted) - min(accepted) <= 0.1
    assert not check_growth_conditions(kernel, rho_candidate=1.874).passed


def test_lp_integrability_of_riesz(riesz):
    assert lp_integrability(riesz) == 1


def test_monotonicity_orders(riesz, finite_history):
    assert check_monotonicity(riesz) == 4
    assert check_monotonicity(finite_history) == 4


def test_monotone_order_counts_passed_sign_checks():
    t = np.linspace(0.01, 10.0, 500)
    # negative values fail the order-0 check
    assert check_monotonicity(Tabulated(t, np.cos(t))) == -1
    # positive but increasing on (pi, 2 pi)
    assert check_monotonicity(Tabulated(t, 2.0 + np.cos(t))) == 0


def test_riesz_b_smooth_ratio_is_constant(riesz):
    t = np.geomspace(1e-4, 1e4, 9)
    assert np.allclose(b_smooth_ratio(riesz, t), (0.5) / (1.5 * 0.5), rtol=1e-10)
    assert check_b_smooth(riesz).passed


def test_finite_history_b_smooth(finite_history):
    result = check_b_smooth(finite_history)
    assert result.bounded_small and result.bounded_large
    assert np.all(result.ratio > 0)


def test_l1_norm_slopes(riesz, finite_history):
    assert l1_norm_scaling(riesz).slope == pytest.approx(0.5, abs=0.01)
    tempered = l1_norm_scaling(TemperedRiesz(1.5, 2.0))
    assert tempered.slope == pytest.approx(0.5, abs=0.02)
    bounded = l1_norm_scaling(finite_history, np.geomspace(1.0, 10.0, 6))
    assert bounded.slope == pytest.approx(0.0, abs=1e-10)


def test_certify_riesz(riesz):
    report = certify_kernel(riesz)
    assert report.passed
    assert report.monotone_order == 4
    names = [row["name"] for row in report.records()]
    assert {"rho_sector", "growth_first", "growth_second"} <= set(names)
    for row in report.records():
        assert set(row) >= {"name", "value", "threshold", "pass"}
    assert report.to_dict()["passed"] is True


def test_certify_laplace_example():
    report = certify_kernel(LaplaceDefined.example())
    assert report.rho_sector == pytest.approx(1.874, abs=0.01)
    assert report.growth.rho_candidate == pytest.approx(1.4)
    assert report.growth.passed
    lo, hi = report.growth_interval()
    assert lo <= 1.4 <= hi
    assert report.monotone_order is None
