"""
Memory kernels b(t): time-domain evaluation, repeated primitives and Laplace transforms
"""

import math
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from src.kernel.laplace import (
    abs_integral_quadrature,
    laplace_quadrature,
    primitive_quadrature,
)
from src.utils.errors import (
    DerivativeUnavailable,
    KernelMomentFailure,
    NonanalyticPoint,
    NonPositiveTime,
    OutsideTabulatedRange,
    ParameterOutOfRange,
)

try:
    from config.settings import FD_RELATIVE_STEP
except ImportError:
    FD_RELATIVE_STEP = 1e-5

ComplexFunction = Callable[[complex], complex]


def _as_times(t: ArrayLike) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _check_lambda(lam: ArrayLike) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam.real <= 0):
        raise NonanalyticPoint("Laplace transform requires Re(lambda) > 0")
    return lam


def falling_factorial(x: float, n: int) -> float:
    """x (x-1) ... (x-n+1)"""
    value = 1.0
    for i in range(n):
        value *= x - i
    return value


class KernelSpec(ABC):
    """Base class for memory kernels b on (0, inf)"""

    variant = "kernel"
    singular_exponent = 0.0  # b(t) ~ t^p near 0
    support = math.inf
    nonnegative = True
    has_time_domain = True
    asymptotic_power = False  # b^(lam) <~ lam^{1-rho} for lam > 1

    def __init__(self, rho: Optional[float] = None) -> None:
        self.rho = rho

    # -- time domain -------------------------------------------------------

    def evaluate(self, t: ArrayLike) -> np.ndarray:
        """b(t) for t > 0"""
        times = _as_times(t)
        if np.any(times <= 0):
            raise NonPositiveTime("kernel evaluated at t <= 0")
        return self._evaluate(times)

    __call__ = evaluate

    @abstractmethod
    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        ...

    def regular_part(self, t: ArrayLike) -> np.ndarray:
        """b(t) t^{-p}, finite at t = 0"""
        times = _as_times(t)
        if self.singular_exponent == 0.0:
            return self._evaluate(times)
        return self._evaluate(times) * times ** (-self.singular_exponent)

    def breakpoints(self, a: float, b: float) -> Optional[List[float]]:
        """Interior points where b is not smooth"""
        return None

    def primitive(self, t: ArrayLike, order: int = 1) -> np.ndarray:
        """Repeated primitive B_m(t); B_m(0) = 0"""
        times = _as_times(t)
        if np.any(times < 0):
            raise NonPositiveTime("primitive evaluated at t < 0")
        if order < 1:
            raise ParameterOutOfRange("primitive order must be >= 1")
        return self._primitive(times, order)

    def _primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        flat = [primitive_quadrature(self, float(x), order) for x in t.ravel()]
        return np.asarray(flat, dtype=float).reshape(t.shape)

    def l1_norm(self, t: ArrayLike) -> np.ndarray:
        """||b||_{L1(0,t)}"""
        times = _as_times(t)
        if self.nonnegative:
            return self.primitive(times, 1)
        flat = [
            abs_integral_quadrature(self, float(x)) if x > 0 else 0.0
            for x in times.ravel()
        ]
        return np.asarray(flat, dtype=float).reshape(times.shape)

    # -- Laplace domain ----------------------------------------------------

    def laplace(self, lam: ArrayLike) -> np.ndarray:
        """b^(lam) for Re lam > 0"""
        return self.laplace_derivative(lam, 0)

    def laplace_derivative(self, lam: ArrayLike, order: int = 0) -> np.ndarray:
        """order-th derivative of b^ at lam"""
        lam = _check_lambda(lam)
        return self._laplace_derivative(lam, order)

    def _laplace_derivative(self, lam: np.ndarray, order: int) -> np.ndarray:
        return self.laplace_by_quadrature(lam, order)

    def laplace_by_quadrature(self, lam: ArrayLike, order: int = 0) -> np.ndarray:
        """Adaptive quadrature of the defining integral"""
        lam = _check_lambda(lam)
        if not self.has_time_domain:
            raise KernelMomentFailure(
                f"{self.variant} kernel has no time-domain evaluator"
            )
        flat = [laplace_quadrature(self, complex(x), order) for x in lam.ravel()]
        return np.asarray(flat, dtype=complex).reshape(lam.shape)

    def describe(self) -> Dict[str, object]:
        return {"variant": self.variant, "rho": self.rho}

    def __repr__(self) -> str:
        items = self.describe().items()
        params = ", ".join(f"{k}={v}" for k, v in items if k != "variant")
        return f"{type(self).__name__}({params})"


class TemperedRiesz(KernelSpec):
    """b(t) = t^{rho-2} e^{-eta t} / Gamma(rho-1)"""

    variant = "tempered-riesz"
    asymptotic_power = True

    def __init__(self, rho: float, eta: float = 0.0) -> None:
        if not 1.0 < rho < 2.0:
            raise ParameterOutOfRange(f"rho must lie in (1, 2), got {rho}")
        if eta < 0.0:
            raise ParameterOutOfRange(f"eta must be >= 0, got {eta}")
        super().__init__(rho)
        self.eta = float(eta)
        self.singular_exponent = rho - 2.0
        self._rgamma = float(special.rgamma(rho - 1.0))

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        return t ** (self.rho - 2.0) * np.exp(-self.eta * t) * self._rgamma

    def regular_part(self, t: ArrayLike) -> np.ndarray:
        return np.exp(-self.eta * _as_times(t)) * self._rgamma

    def _primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        a = self.rho - 1.0
        if self.eta == 0.0:
            return t ** (a + order - 1.0) * special.rgamma(a + order)
        # expand (t - s)^{m-1} and integrate each power against the tempered weight
        eta = self.eta
        x = eta * t
        total = np.zeros_like(t)
        pochhammer = 1.0
        for l in range(order):
            coeff = (-1.0) ** l / (math.factorial(order - 1 - l) * math.factorial(l))
            scale = pochhammer * eta ** (-a - l) * special.gammainc(a + l, x)
            total += coeff * t ** (order - 1 - l) * scale
            pochhammer *= a + l
        return total

    def _laplace_derivative(self, lam: np.ndarray, order: int) -> np.ndarray:
        exponent = 1.0 - self.rho
        shifted = (lam + self.eta) ** (exponent - order)
        return falling_factorial(exponent, order) * shifted

    def describe(self) -> Dict[str, object]:
        return {"variant": self.variant, "rho": self.rho, "eta": self.eta}


class FiniteHistory(KernelSpec):
    """b(t) = (t^{(rho-2)/3} - 1)^3 on (0, 1), zero afterwards"""

    variant = "finite-history"
    support = 1.0
    asymptotic_power = True

    def __init__(self, rho: float) -> None:
        if not 1.0 < rho < 2.0:
            raise ParameterOutOfRange(f"rho must lie in (1, 2), got {rho}")
        super().__init__(rho)
        self.beta = (rho - 2.0) / 3.0
        self.singular_exponent = rho - 2.0
        # (t^beta - 1)^3 = sum_j c_j t^{j beta}
        self._coeffs = np.array([-1.0, 3.0, -3.0, 1.0])
        self._powers = self.beta * np.arange(4)

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        inside = t < 1.0
        safe = np.where(inside, t, 0.5)
        return np.where(inside, (safe ** self.beta - 1.0) ** 3, 0.0)

    def regular_part(self, t: ArrayLike) -> np.ndarray:
        t = _as_times(t)
        inside = t < 1.0
        safe = np.where(inside, t, 0.0)
        return np.where(inside, (1.0 - safe ** (-self.beta)) ** 3, 0.0)

    def breakpoints(self, a: float, b: float) -> Optional[List[float]]:
        return [1.0] if a < 1.0 < b else None

    def _inner_primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        """B_m on [0, 1] from the power expansion"""
        total = np.zeros_like(t)
        for c, q in zip(self._coeffs, self._powers):
            ratio = special.gamma(q + 1.0) * special.rgamma(q + order + 1.0)
            total += c * ratio * t ** (q + order)
        return total

    def _primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        inside = np.minimum(t, 1.0)
        result = self._inner_primitive(inside, order)
        outside = t > 1.0
        if np.any(outside):
            # polynomial continuation: B_m(t) = sum_l B_{m-l}(1) (t-1)^l / l!
            d = t[outside] - 1.0
            continued = np.zeros_like(d)
            ones = np.ones(1)
            for l in range(order):
                inner = self._inner_primitive(ones, order - l)[0]
                continued += inner * d ** l / math.factorial(l)
            result[outside] = continued
        return result

    def describe(self) -> Dict[str, object]:
        return {"variant": self.variant, "rho": self.rho}


class Tabulated(KernelSpec):
    """Piecewise-linear kernel through (times, values)"""

    variant = "tabulated"

    def __init__(
        self,
        times: Sequence[float],
        values: Sequence[float],
        rho: Optional[float] = None,
    ) -> None:
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        matching = self.times.ndim == 1 and self.times.shape == self.values.shape
        if not matching or self.times.size < 2:
            raise ParameterOutOfRange(
                "tabulated kernel needs matching 1-d times and values"
            )
        if self.times[0] <= 0 or np.any(np.diff(self.times) <= 0):
            raise ParameterOutOfRange(
                "tabulated times must be positive and strictly increasing"
            )
        super().__init__(rho)
        self.support = float(self.times[-1])
        self.nonnegative = bool(np.all(self.values >= 0))
        self._slopes = np.diff(self.values) / np.diff(self.times)

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise OutsideTabulatedRange(
                f"t outside tabulated range [{self.times[0]}, {self.times[-1]}]"
            )
        return np.interp(t, self.times, self.values)

    def regular_part(self, t: ArrayLike) -> np.ndarray:
        # constant below the first node, zero past the last
        t = _as_times(t)
        inner = np.interp(t, self.times, self.values)
        return np.where(t > self.times[-1], 0.0, inner)

    def breakpoints(self, a: float, b: float) -> Optional[List[float]]:
        inner = self.times[(self.times > a) & (self.times < b)]
        if inner.size == 0:
            return None
        if inner.size > 100:
            inner = inner[np.linspace(0, inner.size - 1, 100).astype(int)]
        return inner.tolist()

    def _primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        # exact piecewise-polynomial primitives of the linear interpolant
        knots = np.concatenate(([0.0], self.times))
        intercepts = self.values[:-1] - self._slopes * self.times[:-1]
        alpha = np.concatenate(([self.values[0]], intercepts))
        slope = np.concatenate(([0.0], self._slopes))
        left = knots[:-1]
        right = knots[1:]
        flat = t.ravel()
        out = np.empty_like(flat)
        m_fact = math.factorial(order)
        m1_fact = (order + 1) * math.factorial(order - 1)
        for i, x in enumerate(flat):
            active = left < x
            lo = left[active]
            hi = np.minimum(right[active], x)
            level = alpha[active] + slope[active] * x
            d_lo, d_hi = x - lo, x - hi
            out[i] = np.sum(
                level * (d_lo ** order - d_hi ** order) / m_fact
                - slope[active] * (d_lo ** (order + 1) - d_hi ** (order + 1)) / m1_fact
            )
        return out.reshape(t.shape)

    def describe(self) -> Dict[str, object]:
        return {
            "variant": self.variant,
            "nodes": int(self.times.size),
            "support": self.support,
        }


class LaplaceDefined(KernelSpec):
    """Kernel given through its Laplace transform"""

    variant = "laplace-defined"

    def __init__(
        self,
        transform: ComplexFunction,
        derivatives: Optional[Sequence[ComplexFunction]] = None,
        time_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        singular_exponent: float = 0.0,
        rho: Optional[float] = None,
        asymptotic_power: bool = False,
        finite_differences: bool = True,
        label: str = "custom",
    ) -> None:
        super().__init__(rho)
        self.transform = transform
        self.derivatives = list(derivatives or [])
        self.time_evaluator = time_evaluator
        self.has_time_domain = time_evaluator is not None
        self.singular_exponent = singular_exponent
        self.asymptotic_power = asymptotic_power
        self.finite_differences = finite_differences
        self.label = label
        self.parameters: Dict[str, float] = {}

    @classmethod
    def example(
        cls, exponent: float = 0.4, weight: float = 0.4, power: int = 5
    ) -> "LaplaceDefined":
        """b^(lam) = 1 / (lam^a + c((lam + 1)^{-m} - 1)) with closed-form derivatives"""
        a, c, m = float(exponent), float(weight), int(power)

        def denominator(lam: ArrayLike, j: int = 0) -> np.ndarray:
            shift = falling_factorial(-m, j) * (lam + 1.0) ** (-m - j)
            if j == 0:
                shift = shift - 1.0
            return falling_factorial(a, j) * lam ** (a - j) + c * shift

        def g0(lam: ArrayLike) -> np.ndarray:
            return 1.0 / denominator(lam)

        def g1(lam: ArrayLike) -> np.ndarray:
            d0, d1 = denominator(lam), denominator(lam, 1)
            return -d1 / d0 ** 2

        def g2(lam: ArrayLike) -> np.ndarray:
            d0, d1, d2 = denominator(lam), denominator(lam, 1), denominator(lam, 2)
            return -d2 / d0 ** 2 + 2.0 * d1 ** 2 / d0 ** 3

        def g3(lam: ArrayLike) -> np.ndarray:
            d0, d1, d2, d3 = (denominator(lam, j) for j in range(4))
            return -d3 / d0 ** 2 + 6.0 * d1 * d2 / d0 ** 3 - 6.0 * d1 ** 3 / d0 ** 4

        kernel = cls(
            g0,
            derivatives=[g1, g2, g3],
            rho=1.0 + a,  # b^ ~ lam^{-a} = lam^{1 - rho}
            asymptotic_power=True,
            label="example",
        )
        kernel.parameters = {"exponent": a, "weight": c, "power": float(m)}
        return kernel

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        if self.time_evaluator is None:
            raise KernelMomentFailure(
                "laplace-defined kernel has no time-domain evaluator"
            )
        return np.asarray(self.time_evaluator(t), dtype=float)

    def _primitive(self, t: np.ndarray, order: int) -> np.ndarray:
        if self.time_evaluator is None:
            raise KernelMomentFailure(
                "laplace-defined kernel has no time-domain evaluator"
            )
        return super()._primitive(t, order)

    def _laplace_derivative(self, lam: np.ndarray, order: int) -> np.ndarray:
        if order == 0:
            return np.asarray(self.transform(lam), dtype=complex)
        if order <= len(self.derivatives):
            return np.asarray(self.derivatives[order - 1](lam), dtype=complex)
        if not self.finite_differences:
            raise DerivativeUnavailable(
                f"no closed form for derivative of order {order}"
            )
        return self._central_difference(lam, order)

    def _central_difference(self, lam: np.ndarray, order: int) -> np.ndarray:
        # steps along the imaginary direction keep Re(lam) fixed
        f = self.transform
        h = np.abs(lam) * FD_RELATIVE_STEP
        ih = 1j * h
        if order == 1:
            return (f(lam + ih) - f(lam - ih)) / (2.0 * ih)
        if order == 2:
            return (f(lam + ih) - 2.0 * f(lam) + f(lam - ih)) / ih ** 2
        if order == 3:
            outer = f(lam + 2 * ih) - f(lam - 2 * ih)
            inner = f(lam + ih) - f(lam - ih)
            return (outer - 2.0 * inner) / (2.0 * ih ** 3)
        raise DerivativeUnavailable(
            f"finite differences limited to order 3, got {order}"
        )

    def describe(self) -> Dict[str, object]:
        info: Dict[str, object] = {
            "variant": self.variant,
            "rho": self.rho,
            "label": self.label,
        }
        info.update(self.parameters)
        return info


def eval_kernel(kernel: KernelSpec, t: ArrayLike) -> np.ndarray:
    """b(t); scalar in, scalar out"""
    value = kernel.evaluate(t)
    return float(value) if np.ndim(value) == 0 else value


def eval_laplace(kernel: KernelSpec, lam: ArrayLike) -> np.ndarray:
    """b^(lam) for Re lam > 0"""
    value = kernel.laplace(lam)
    return complex(value) if np.ndim(value) == 0 else value
