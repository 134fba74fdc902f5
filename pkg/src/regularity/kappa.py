"""
The two elementary double integrals behind every Hoelder exponent min{1/2, kappa/2 + 1}
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from src.kernel.laplace import quad_checked
from src.utils.errors import ParameterOutOfRange
from src.utils.fitting import LogLogFit, fit_loglog


def _check(kappa: float, t: float, h: float) -> None:
    if not -2.0 < kappa < 0.0:
        raise ParameterOutOfRange(f"kappa must lie in (-2, 0), got {kappa}")
    if t <= 0.0 or h <= 0.0:
        raise ParameterOutOfRange("t and h must be positive")


@dataclass(frozen=True)
class KappaIntegrals:
    kappa: float
    t: float
    h: float
    first: float  # int_t^{t+h} int_0^t (eta - sigma)^{kappa/2 - 1}
    second: float  # int_t^{t+h} (int_0^t (eta - sigma)^{kappa - 1})^{1/2}

    @property
    def exponent(self) -> float:
        return self.kappa / 2.0 + 1.0


def first_integral(kappa: float, t: float, h: float) -> float:
    """[h^{a+1} - ((t+h)^{a+1} - t^{a+1})] / (-a (a+1)) with a = kappa/2"""
    _check(kappa, t, h)
    a = kappa / 2.0
    growth = t ** (a + 1.0) * math.expm1((a + 1.0) * math.log1p(h / t))
    return (h ** (a + 1.0) - growth) / (-a * (a + 1.0))


def _inner_second(kappa: float, t: float) -> Callable[[float], float]:
    """(u^kappa - (u+t)^kappa) / (-kappa) over u^kappa, as a function of u = eta - t"""
    def factor(u: float) -> float:
        return (1.0 - (u / (u + t)) ** (-kappa)) / (-kappa)
    return factor


def second_integral(kappa: float, t: float, h: float) -> float:
    """Quadrature with the algebraic weight u^{kappa/2} at the lower end"""
    _check(kappa, t, h)
    factor = _inner_second(kappa, t)
    value, _ = quad_checked(
        lambda u: math.sqrt(factor(u)), 0.0, h, weight="alg", wvar=(kappa / 2.0, 0.0)
    )
    return value


def kappa_integrals(kappa: float, t: float, h: float) -> KappaIntegrals:
    first = first_integral(kappa, t, h)
    return KappaIntegrals(kappa, t, h, first, second_integral(kappa, t, h))


def kappa_integrals_by_quadrature(kappa: float, t: float, h: float) -> KappaIntegrals:
    """Oracle: the first integral via its inner integral, the second by a plain rule"""
    _check(kappa, t, h)
    a = kappa / 2.0

    def inner_first(u: float) -> float:
        return (1.0 - (u / (u + t)) ** (-a)) / (-a)

    first, _ = quad_checked(inner_first, 0.0, h, weight="alg", wvar=(a, 0.0))
    factor = _inner_second(kappa, t)

    def full_second(u: float) -> float:
        return math.sqrt(factor(u) * u ** kappa)

    second, _ = quad_checked(
        full_second, 0.0, h, epsrel=1e-12, points=[h * 1e-6, h * 1e-3]
    )
    return KappaIntegrals(kappa, t, h, first, second)


@dataclass
class KappaSlopes:
    kappa: float
    t: float
    h: np.ndarray
    first: LogLogFit
    second: LogLogFit
    first_constant: float
    second_constant: float

    @property
    def predicted(self) -> float:
        return self.kappa / 2.0 + 1.0

    def passed(self, tolerance: float = 0.02) -> bool:
        return min(self.first.slope, self.second.slope) >= self.predicted - tolerance

    def to_dict(self) -> Dict[str, object]:
        return {
            "kappa": self.kappa,
            "t": self.t,
            "predicted": self.predicted,
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "first_constant": self.first_constant,
            "second_constant": self.second_constant,
        }


def kappa_slopes(
    kappa: float, t: float = 1.0, ks: Sequence[int] = tuple(range(8, 21))
) -> KappaSlopes:
    """Slopes in h of both integrals over h = t 2^-k, and C = max I / h^{kappa/2+1}"""
    h = t * 2.0 ** (-np.asarray(ks, dtype=float))
    first = np.array([first_integral(kappa, t, x) for x in h])
    second = np.array([second_integral(kappa, t, x) for x in h])
    scale = h ** (kappa / 2.0 + 1.0)
    return KappaSlopes(
        kappa=kappa,
        t=t,
        h=h,
        first=fit_loglog(h, first),
        second=fit_loglog(h, second),
        first_constant=float(np.max(first / scale)),
        second_constant=float(np.max(second / scale)),
    )
