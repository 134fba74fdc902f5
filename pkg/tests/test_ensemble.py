"""
Monte Carlo ensembles, measurement plans and the ensemble CSV
"""

import numpy as np
import pytest

from src.resolvent.grid import TimeGrid
from src.solver.ensemble import MeasurementPlan, base_nodes, dyadic_lags, ensemble_solve
from src.utils.errors import EnsembleFailure, LagOutOfRange, ParameterOutOfRange


def test_dyadic_lags():
    assert dyadic_lags(TimeGrid.uniform(1.0, 128)) == (16, 8, 4)
    assert dyadic_lags(TimeGrid.uniform(1.0, 512)) == (64, 32, 16, 8, 4)
    with pytest.raises(LagOutOfRange):
        dyadic_lags(TimeGrid.uniform(1.0, 100))


def test_base_nodes(small_grid):
    assert base_nodes(small_grid) == (32, 64, 96)


def test_plan_validation(small_grid):
    MeasurementPlan.default(small_grid, (0.0,)).validate(small_grid)
    with pytest.raises(LagOutOfRange):
        MeasurementPlan((0.0,), (2,), (0,)).validate(small_grid)
    with pytest.raises(LagOutOfRange):
        MeasurementPlan((0.0,), (32,), (0,)).validate(small_grid)
    with pytest.raises(LagOutOfRange):
        MeasurementPlan((0.0,), (16,), (120,)).validate(small_grid)


def test_ensemble_shapes(additive_problem, small_grid, small_bank):
    plan = MeasurementPlan.default(small_grid, (0.0, 0.1), keep_paths=True)
    result = ensemble_solve(
        additive_problem, small_grid, 7, 6, plan=plan, threads=2, bank=small_bank
    )
    assert result.n_paths == 6
    assert result.norms.shape == (6, 2, 129)
    assert result.increments.shape == (6, 2, 3, 3)
    assert result.sup_increments.shape == (6, 2, 3)
    assert len(result.paths) == 6
    assert np.all(result.norms[:, :, 0] == 0.0)
    first_lag = result.increments[:, :, 0].max(axis=-1)
    assert np.all(result.sup_increments[:, :, 0] >= first_lag)


def test_ensemble_reproducible_across_threads(
    nemytskii_problem, small_grid, small_bank
):
    def run(seed, threads):
        return ensemble_solve(
            nemytskii_problem, small_grid, seed, 4, threads=threads, bank=small_bank
        )

    one = run(11, 1)
    many = run(11, 4)
    assert np.array_equal(one.norms, many.norms)
    assert np.array_equal(one.increments, many.increments)
    other = run(12, 1)
    assert not np.array_equal(one.norms, other.norms)


def test_lp_norm(additive_problem, small_grid, small_bank):
    result = ensemble_solve(additive_problem, small_grid, 3, 8, bank=small_bank)
    value, stderr = result.lp_norm(additive_problem.s0, 2)
    expected = np.sqrt(np.mean(result.norms[:, 0, :] ** 2, axis=0))
    assert np.allclose(value, expected)
    assert stderr[0] == 0.0
    assert np.all(stderr >= 0.0)
    with pytest.raises(ParameterOutOfRange):
        result.s_index(0.3)


def test_summary(nemytskii_problem, small_grid, small_bank):
    result = ensemble_solve(nemytskii_problem, small_grid, 1, 3, bank=small_bank)
    summary = result.summary()
    assert summary["n_paths"] == 3
    assert summary["lags"] == [16, 8, 4]
    assert 0.0 <= summary["max_ratio"] <= 0.9
    assert summary["max_iterations"] >= 2


def test_failures_are_collected(nemytskii_problem, small_grid, small_bank):
    with pytest.raises(EnsembleFailure) as info:
        ensemble_solve(
            nemytskii_problem, small_grid, 1, 2, alpha=1.0, tol=0.0, bank=small_bank
        )
    assert sorted(info.value.failures) == [0, 1]


def test_argument_checks(additive_problem, small_grid, small_bank):
    with pytest.raises(ParameterOutOfRange):
        ensemble_solve(additive_problem, small_grid, 1, 0, bank=small_bank)
    with pytest.raises(ParameterOutOfRange):
        ensemble_solve(
            additive_problem, TimeGrid.uniform(2.0, 128), 1, 1, bank=small_bank
        )


def test_csv_is_reproducible(additive_problem, small_grid, small_bank, tmp_path):
    first = ensemble_solve(additive_problem, small_grid, 9, 3, bank=small_bank)
    second = ensemble_solve(
        additive_problem, small_grid, 9, 3, threads=3, bank=small_bank
    )
    a = first.to_csv(str(tmp_path / "a.csv"), timestamp=False)
    b = second.to_csv(str(tmp_path / "b.csv"), timestamp=False)
    text = open(a, encoding="utf-8").read()
    assert text == open(b, encoding="utf-8").read()
    lines = text.splitlines()
    assert lines[0] == "t,s_exponent,empirical_Lp_norm,n_paths,stderr"
    assert len(lines) == 1 + 129
    stamped = first.to_csv(str(tmp_path / "c.csv"))
    assert open(stamped, encoding="utf-8").readline().startswith("# generated")
