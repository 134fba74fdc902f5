"""
Shared fixtures
"""

import numpy as np
import pytest

from src.kernel.kernels import FiniteHistory, TemperedRiesz
from src.noise.covariance import CovarianceSpec
from src.resolvent.grid import TimeGrid
from src.solver.maps import (
    AdditiveIdentity,
    NemytskiiDrift,
    NemytskiiMultiplicative,
    ZeroDrift,
)
from src.solver.problem import InitialData, ProblemSpec
from src.spectral.bank import build_resolvent_bank
from src.spectral.basis import SpectralBasis


@pytest.fixture
def riesz():
    return TemperedRiesz(1.5)


@pytest.fixture
def finite_history():
    return FiniteHistory(1.5)


@pytest.fixture
def small_grid():
    return TimeGrid.uniform(1.0, 128)


@pytest.fixture
def small_basis():
    return SpectralBasis(16)


@pytest.fixture
def small_bank(riesz, small_basis, small_grid):
    return build_resolvent_bank(riesz, small_basis, small_grid, threads=1)


@pytest.fixture
def additive_problem(riesz, small_basis):
    """Additive trace-class noise q_k = lambda_k^-1, r = 1 - 1/rho"""
    return ProblemSpec(
        kernel=riesz,
        basis=small_basis,
        cov=CovarianceSpec.power(1.0),
        f_map=ZeroDrift(small_basis),
        g_map=AdditiveIdentity(small_basis),
        u0=InitialData.zero(),
        horizon=1.0,
        r=1.0 - 1.0 / 1.5,
    )


@pytest.fixture
def nemytskii_problem(riesz, small_basis):
    """sin-Nemytskii multiplicative noise with an arctan drift"""
    return ProblemSpec(
        kernel=riesz,
        basis=small_basis,
        cov=CovarianceSpec.power(1.0),
        f_map=NemytskiiDrift(small_basis, "arctan", 0.5),
        g_map=NemytskiiMultiplicative(small_basis, "sin", 1.0),
        u0=InitialData.from_modes([1.0, 0.0, 0.25]),
        horizon=1.0,
        r=1.0 - 1.0 / 1.5,
    )


def relative_error(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def mittag_leffler_reference(rho: float, x: float, digits: int = 60) -> float:
    """E_rho(-x) from the power series in high precision"""
    import mpmath

    with mpmath.workdps(digits):
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        n = 0
        while True:
            term = (-x) ** n / mpmath.gamma(rho * n + 1)
            total += term
            if n > 10 and abs(term) < mpmath.mpf(10) ** (-30):
                break
            n += 1
        return float(total)
