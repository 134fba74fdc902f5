"""
Mittag-Leffler function E_rho(z) on the non-positive real axis
"""

import math
from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from config.settings import MITTAG_LEFFLER_EPS, MITTAG_LEFFLER_SERIES_TERMS
from src.utils.errors import ParameterOutOfRange
from src.utils.log import get_logger

logger = get_logger(__name__)


def _series(rho: float, x: float, max_terms: int) -> Tuple[float, float]:
    """sum_n (-x)^n / Gamma(rho n + 1); returns (value, cancellation error estimate)"""
    if x == 0.0:
        return 1.0, 0.0
    n = np.arange(max_terms, dtype=float)
    log_terms = n * math.log(x) - special.gammaln(rho * n + 1.0)
    magnitudes = np.exp(log_terms)
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    largest = float(magnitudes.max())
    truncated = float(magnitudes[-1])
    value = math.fsum((signs * magnitudes).tolist())
    return value, largest * MITTAG_LEFFLER_EPS * 4.0 + truncated


def _asymptotic(rho: float, x: float) -> Tuple[float, float]:
    """-sum_k (-x)^{-k} / Gamma(1 - rho k) plus the oscillating pair for rho > 1"""
    k_max = 400
    k = np.arange(1, k_max + 1, dtype=float)
    # |1/Gamma(1 - rho k)| <= Gamma(rho k) / pi
    log_bound = special.gammaln(rho * k) - math.log(math.pi) - k * math.log(x)
    cutoff = int(np.argmin(log_bound))  # optimal truncation index
    error = math.exp(log_bound[cutoff])
    kk = k[:cutoff]
    terms = -((-1.0) ** kk) * np.exp(-kk * math.log(x)) * special.rgamma(1.0 - rho * kk)
    value = math.fsum(terms.tolist())
    if rho > 1.0:
        r = x ** (1.0 / rho)
        envelope = math.exp(r * math.cos(math.pi / rho))
        value += (2.0 / rho) * envelope * math.cos(r * math.sin(math.pi / rho))
    return value, error


def _scalar(rho: float, z: float, max_terms: int) -> float:
    x = -z
    if rho == 1.0:
        return math.exp(z)
    if rho == 2.0:
        return math.cos(math.sqrt(x))
    series_value, series_error = _series(rho, x, max_terms)
    if x < 1.0 or series_error <= 1e-15:
        return series_value
    asym_value, asym_error = _asymptotic(rho, x)
    if asym_error < series_error:
        value, error = asym_value, asym_error
    else:
        value, error = series_value, series_error
    if error > 1e-10:
        logger.warning("E_%.4g(%.6g) accurate only to about %.1e", rho, z, error)
    return value


def mittag_leffler(
    rho: float, z: ArrayLike, max_terms: int = MITTAG_LEFFLER_SERIES_TERMS
) -> Union[float, np.ndarray]:
    """E_rho(z) for 0 < rho <= 2 and z <= 0 (scalar or array)"""
    if not 0.0 < rho <= 2.0:
        raise ParameterOutOfRange(f"rho must lie in (0, 2], got {rho}")
    values = np.asarray(z, dtype=float)
    if np.any(values > 0) or not np.all(np.isfinite(values)):
        raise ParameterOutOfRange("Mittag-Leffler evaluation needs finite z <= 0")
    flat = np.array([_scalar(float(rho), float(v), max_terms) for v in values.ravel()])
    if values.ndim == 0:
        return float(flat[0])
    return flat.reshape(values.shape)


def riesz_resolvent(rho: float, mu: float, t: ArrayLike) -> Union[float, np.ndarray]:
    """s_mu(t) = E_rho(-mu t^rho), the scalar resolvent of the pure Riesz kernel"""
    return mittag_leffler(rho, -mu * np.asarray(t, dtype=float) ** rho)
