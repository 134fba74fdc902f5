"""
Picard iteration, maps and problem validation
"""

import numpy as np
import pytest

from config.settings import PICARD_MAX_ITER, PICARD_TOL
from src.kernel.kernels import TemperedRiesz
from src.noise.convolution import stochastic_convolution
from src.noise.covariance import CovarianceSpec
from src.noise.increments import sample_increments
from src.resolvent.grid import TimeGrid
from src.solver.maps import (
    AdditiveIdentity,
    DiagonalLinear,
    DiagonalMultiplicative,
    NemytskiiDrift,
    NemytskiiMultiplicative,
    ZeroDrift,
    ZeroNoise,
    apply_F,
)
from src.solver.picard import (
    geometric_ratio,
    initial_alpha,
    picard_solve,
    weighted_distance,
)
from src.solver.problem import InitialData, ProblemSpec
from src.spectral.bank import build_resolvent_bank
from src.spectral.basis import SpectralBasis, SpectralField
from src.utils.errors import NoContraction, ParameterOutOfRange


def test_diagonal_maps(small_basis):
    coeffs = np.ones((16, 3))
    linear = DiagonalLinear(small_basis, np.arange(16) * 0.1)
    assert np.allclose(linear.apply(coeffs)[:, 0], np.arange(16) * 0.1)
    assert linear.lipschitz == pytest.approx(1.5)
    noise = np.full((16, 3), 2.0)
    mult = DiagonalMultiplicative(small_basis, 0.5)
    assert np.allclose(mult.apply(coeffs, noise), 1.0)
    assert ZeroDrift(small_basis).is_zero
    assert AdditiveIdentity(small_basis).is_additive
    assert not mult.is_additive


def test_nemytskii_maps_act_pointwise(small_basis):
    drift = NemytskiiDrift(small_basis, "sin", 1.0)
    zero = np.zeros((16, 2))
    assert np.allclose(drift.apply(zero), 0.0)
    coeffs = np.zeros((16, 1))
    coeffs[0, 0] = 1e-6
    # sin(u) ~ u for small u
    assert np.allclose(drift.apply(coeffs), coeffs, atol=1e-15)
    mult = NemytskiiMultiplicative(small_basis, "arctan", 2.0)
    assert np.allclose(mult.apply(zero, np.ones((16, 2))), 0.0)
    with pytest.raises(ParameterOutOfRange):
        NemytskiiDrift(small_basis, "tanh")


def test_apply_F_on_a_field(small_basis):
    field = 0.5 * small_basis.unit(1)
    moved = apply_F(DiagonalLinear(small_basis, 2.0), field)
    assert moved.coeffs[0] == pytest.approx(1.0)
    assert moved.basis is small_basis


def test_problem_validation(riesz, small_basis):
    common = dict(
        kernel=riesz,
        basis=small_basis,
        cov=CovarianceSpec.white(),
        f_map=ZeroDrift(small_basis),
        g_map=AdditiveIdentity(small_basis),
        u0=InitialData.zero(),
        horizon=1.0,
    )
    problem = ProblemSpec(r=-1.0 / 6.0, **common)
    assert problem.rho == 1.5
    assert problem.s0 == pytest.approx(-0.5)
    assert problem.holder_ceiling == pytest.approx(1.0 / 6.0)
    assert problem.kappa(0.0) == pytest.approx(-1.75)
    assert problem.predicted_exponent(0.0) == pytest.approx(0.125)
    assert problem.constant_map
    with pytest.raises(ParameterOutOfRange):
        ProblemSpec(r=1.0, **common)
    with pytest.raises(ParameterOutOfRange):
        ProblemSpec(r=0.0, p=1, **common)
    with pytest.raises(ParameterOutOfRange):
        ProblemSpec(r=0.0, rho=2.5, **common)
    with pytest.raises(ParameterOutOfRange):
        ProblemSpec(r=0.0, **dict(common, f_map=ZeroDrift(SpectralBasis(4))))


def test_initial_data(small_basis):
    assert np.all(InitialData.zero().sample(small_basis).coeffs == 0.0)
    field = InitialData.from_modes([1.0, 2.0]).sample(small_basis)
    assert field.coeffs[:3].tolist() == [1.0, 2.0, 0.0]
    copied = InitialData.from_field(small_basis.unit(2)).sample(small_basis)
    assert copied.coeffs[1] == 1.0
    random = InitialData.random(2.0)
    assert random.is_random and not InitialData.zero().is_random
    first = random.sample(small_basis, 4, 1).coeffs
    assert np.array_equal(first, random.sample(small_basis, 4, 1).coeffs)
    assert not np.array_equal(first, random.sample(small_basis, 4, 2).coeffs)
    with pytest.raises(ParameterOutOfRange):
        InitialData("field")


def test_geometric_ratio():
    assert geometric_ratio([1.0, 0.5, 0.25, 0.125]) == pytest.approx(0.5)
    assert geometric_ratio([1.0]) == 0.0
    assert geometric_ratio([1.0, 0.0]) == 0.0


def test_weighted_distance(small_bank):
    diff = np.zeros((16, 129))
    diff[0, :] = 1.0
    weighted, raw = weighted_distance(diff, small_bank, 0.0, 2.0)
    assert raw == pytest.approx(1.0)
    assert weighted == pytest.approx(1.0)
    diff[0, :] = small_bank.grid.nodes
    weighted, raw = weighted_distance(diff, small_bank, 0.0, 2.0)
    assert raw == pytest.approx(1.0)
    assert weighted == pytest.approx(0.5 * np.exp(-1.0), rel=1e-3)


def test_picard_contracts(nemytskii_problem, small_bank, small_grid):
    path, certificate = picard_solve(
        nemytskii_problem, small_bank, small_grid, seed=1, path_index=0
    )
    assert certificate.converged
    assert certificate.iterations <= PICARD_MAX_ITER
    assert certificate.ratio <= 0.9
    assert certificate.distances[-1] < PICARD_TOL
    pairs = zip(certificate.raw_distances, certificate.distances)
    assert all(raw >= d for raw, d in pairs)
    assert certificate.alpha >= initial_alpha(nemytskii_problem)
    assert np.allclose(path.coeffs[:3, 0], [1.0, 0.0, 0.25])
    assert certificate.to_dict()["converged"] is True


def test_fixed_point_is_unique(nemytskii_problem, small_bank, small_grid):
    first, one = picard_solve(
        nemytskii_problem, small_bank, small_grid, seed=2, path_index=0
    )
    start = np.random.default_rng(8).standard_normal(first.coeffs.shape)
    second, other = picard_solve(
        nemytskii_problem, small_bank, small_grid, seed=2, path_index=0, initial=start
    )
    alpha = max(one.alpha, other.alpha)
    diff = first.coeffs - second.coeffs
    gap, _ = weighted_distance(diff, small_bank, nemytskii_problem.s0, alpha)
    assert gap <= 10 * PICARD_TOL


def test_solution_is_causal(nemytskii_problem, small_bank, small_grid):
    problem = nemytskii_problem
    noise = sample_increments(problem.cov, small_grid, 3, 0, 16, small_bank.basis)
    step = 64
    base, _ = picard_solve(
        problem, small_bank, small_grid, 3, 0, alpha=1.0, noise=noise
    )
    shifted = noise.perturbed(step, 0.1)
    moved, _ = picard_solve(
        problem, small_bank, small_grid, 3, 0, alpha=1.0, noise=shifted
    )
    before, after = slice(0, step + 1), slice(step + 1, None)
    assert np.allclose(base.coeffs[:, before], moved.coeffs[:, before], atol=1e-7)
    assert not np.allclose(base.coeffs[:, after], moved.coeffs[:, after], atol=1e-6)


def test_additive_problem_is_the_stochastic_convolution(
    additive_problem, small_bank, small_grid
):
    path, certificate = picard_solve(
        additive_problem, small_bank, small_grid, seed=5, path_index=2
    )
    assert certificate.iterations == 1
    cov = additive_problem.cov
    expected = stochastic_convolution(small_bank, cov, small_grid, 5, 2, 1.0)
    assert np.allclose(path.coeffs, expected.coeffs, atol=1e-12)


def test_no_contraction(nemytskii_problem, small_bank, small_grid):
    with pytest.raises(NoContraction) as info:
        picard_solve(
            nemytskii_problem, small_bank, small_grid, 1, 0, alpha=1.0, max_iter=1
        )
    assert info.value.alpha == 1.0
    assert len(info.value.distances) == 1


def test_deterministic_linear_problem_decays(small_bank, small_grid):
    basis = small_bank.basis
    problem = ProblemSpec(
        kernel=TemperedRiesz(1.5),
        basis=basis,
        cov=CovarianceSpec.white(),
        f_map=ZeroDrift(basis),
        g_map=DiagonalMultiplicative(basis, 0.0),
        u0=InitialData.from_modes([1.0]),
        horizon=1.0,
        r=0.0,
    )
    path, _ = picard_solve(problem, small_bank, small_grid, 0, 0)
    assert np.allclose(path.coeffs[0], small_bank.s[0])


def test_contraction_improves_with_alpha(nemytskii_problem, small_bank, small_grid):
    _, certificate = picard_solve(
        nemytskii_problem, small_bank, small_grid, seed=4, path_index=0
    )
    alpha = initial_alpha(nemytskii_problem)
    ratios = [certificate.at(factor * alpha).ratio for factor in (1.0, 2.0, 4.0)]
    assert ratios[0] < 1.0
    assert ratios[1] <= ratios[0] * (1.0 + 1e-9)
    assert ratios[2] <= ratios[1] * (1.0 + 1e-9)
    # the same iterates are re-weighted, never re-run
    assert certificate.at(4.0 * alpha).raw_distances == certificate.raw_distances


def test_stop_rule_uses_weighted_distance(nemytskii_problem, small_bank, small_grid):
    _, certificate = picard_solve(
        nemytskii_problem, small_bank, small_grid, seed=1, path_index=0, alpha=50.0
    )
    assert certificate.alpha == 50.0
    assert certificate.distances[-1] < PICARD_TOL
    assert all(d >= PICARD_TOL for d in certificate.distances[:-1])


def test_diagonal_linear_matches_scalar_volterra_solve(riesz):
    """u = s u0 + c (s * u) has Laplace transform 1 / (z + mu z^{1-rho} - c)"""
    import mpmath

    basis = SpectralBasis(1)
    grid = TimeGrid.uniform(1.0, 256)
    bank = build_resolvent_bank(riesz, basis, grid)
    c = 2.0
    problem = ProblemSpec(
        kernel=riesz,
        basis=basis,
        cov=CovarianceSpec.white(),
        f_map=DiagonalLinear(basis, np.array([c])),
        g_map=ZeroNoise(basis),
        u0=InitialData.from_modes([1.0]),
        horizon=1.0,
        r=0.0,
    )
    path, certificate = picard_solve(problem, bank, grid, 0, 0, alpha=1.0)
    assert certificate.converged
    mu = float(basis.eigenvalues[0])

    def transform(z):
        return 1 / (z + mu * z ** (1 - riesz.rho) - c)

    for t in (0.25, 0.5, 0.75, 1.0):
        j = grid.index_of(t)
        expected = float(mpmath.invertlaplace(transform, t, method="talbot"))
        assert path.coeffs[0, j] == pytest.approx(expected, abs=1e-2)
        assert abs(expected - bank.s[0, j]) > 0.02


def test_nemytskii_maps_respect_their_lipschitz_constant(small_basis):
    rng = np.random.default_rng(31)
    maps = [
        NemytskiiDrift(small_basis, "sin", 1.5),
        NemytskiiDrift(small_basis, "arctan", 0.75),
    ]
    for _ in range(100):
        f = SpectralField(rng.standard_normal(16) * rng.uniform(0.1, 3.0), small_basis)
        g = SpectralField(rng.standard_normal(16) * rng.uniform(0.1, 3.0), small_basis)
        gap = (f - g).hdot_norm(0.0)
        for drift in maps:
            moved = (apply_F(drift, f) - apply_F(drift, g)).hdot_norm(0.0)
            assert moved <= drift.lipschitz * gap * (1.0 + 1e-10)


@pytest.mark.slow
def test_reference_multiplicative_configuration(riesz):
    basis = SpectralBasis(64)
    grid = TimeGrid.uniform(1.0, 512)
    bank = build_resolvent_bank(riesz, basis, grid)
    problem = ProblemSpec(
        kernel=riesz,
        basis=basis,
        cov=CovarianceSpec.power(1.0),
        f_map=NemytskiiDrift(basis, "arctan", 0.5),
        g_map=NemytskiiMultiplicative(basis, "sin", 1.0),
        u0=InitialData.from_modes([1.0, 0.0, 0.25]),
        horizon=1.0,
        r=1.0 - 1.0 / 1.5,
    )
    first, certificate = picard_solve(problem, bank, grid, seed=6, path_index=0)
    assert certificate.converged
    assert certificate.ratio <= 0.9
    assert certificate.iterations <= 30
    assert certificate.distances[-1] < 1e-8
    start = bank.s * first.coeffs[:, :1]
    second, other = picard_solve(
        problem, bank, grid, seed=6, path_index=0, initial=start
    )
    alpha = max(certificate.alpha, other.alpha)
    gap, _ = weighted_distance(first.coeffs - second.coeffs, bank, problem.s0, alpha)
    assert gap <= 10 * certificate.tol
