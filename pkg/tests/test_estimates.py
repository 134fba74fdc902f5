"""
Scaling of the weighted resolvent norms in mu
"""

import logging

import numpy as np
import pytest

from src.kernel.kernels import FiniteHistory, TemperedRiesz
from src.resolvent.estimates import NORM_NAMES, slope_targets, verify_scalar_estimates
from src.resolvent.grid import TimeGrid
from src.utils.errors import HorizonTooShort, ParameterOutOfRange

MU_GRID = [1.0, 10.0, 100.0, 1000.0]


@pytest.fixture(scope="module")
def riesz_report():
    grid = TimeGrid.graded(20.0, 2048, 2.0)
    return verify_scalar_estimates(
        TemperedRiesz(1.5), MU_GRID, grid, threads=2, keep_tables=True
    )


def test_targets():
    targets = slope_targets(1.5)
    assert targets["s"] == pytest.approx(-2.0 / 3.0)
    assert targets["sdot"] == 0.0
    assert targets["t_sddot"] == 0.0
    assert targets["t2_sddot"] == pytest.approx(-2.0 / 3.0)


def test_riesz_l1_norm_slope(riesz_report):
    assert riesz_report.fits["s"].slope == pytest.approx(-2.0 / 3.0, abs=0.05)


@pytest.mark.parametrize("name", NORM_NAMES)
def test_riesz_norm_slopes(riesz_report, name):
    target = riesz_report.targets[name]
    assert riesz_report.fits[name].slope == pytest.approx(target, abs=0.05)


def test_riesz_contraction(riesz_report):
    assert riesz_report.contraction
    assert np.all(riesz_report.sup_norms <= 1.0 + 1e-6)
    assert riesz_report.passed(0.05)


def test_report_serialises(riesz_report):
    payload = riesz_report.to_dict(0.05)
    assert payload["passed"] is True
    assert {row["name"] for row in payload["checks"]} >= {"slope[s]", "sup|s|"}
    assert len(riesz_report.tables) == len(MU_GRID)
    assert set(riesz_report.constants()) == set(NORM_NAMES)


def test_final_values_recorded(riesz_report):
    assert np.all(riesz_report.final_values < 0.01)


def test_horizon_too_short():
    with pytest.raises(HorizonTooShort) as info:
        verify_scalar_estimates(
            TemperedRiesz(1.5), MU_GRID, TimeGrid.graded(0.01, 256, 2.0)
        )
    assert "mu=1000" in str(info.value)


def test_horizon_checked_on_the_largest_mu_only(caplog):
    with caplog.at_level(logging.WARNING):
        report = verify_scalar_estimates(
            TemperedRiesz(1.5), MU_GRID, TimeGrid.graded(1.0, 512, 2.0)
        )
    assert report.final_values[-1] < 0.01
    assert report.final_values[0] >= 0.01
    assert "mu=1;" in caplog.text


def test_mu_grid_must_span_three_decades():
    with pytest.raises(ParameterOutOfRange):
        verify_scalar_estimates(
            TemperedRiesz(1.5), [1.0, 10.0, 100.0], TimeGrid.graded(20.0, 256, 2.0)
        )


@pytest.mark.slow
def test_finite_history_slopes():
    grid = TimeGrid.graded(20.0, 2048, 2.0)
    mu_grid = [10.0, 100.0, 1000.0, 10000.0]
    report = verify_scalar_estimates(FiniteHistory(1.5), mu_grid, grid)
    assert report.contraction
    for name in NORM_NAMES:
        assert report.fits[name].slope == pytest.approx(report.targets[name], abs=0.1)
