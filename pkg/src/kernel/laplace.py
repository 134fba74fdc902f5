"""
Adaptive quadrature for Laplace transforms and primitives of memory kernels
"""

import math
import warnings
from typing import TYPE_CHECKING, Any, Callable, Dict, Tuple

import numpy as np
from scipy import integrate

from src.utils.errors import NonanalyticPoint, QuadratureFailure
from src.utils.log import get_logger

try:
    from config.settings import QUAD_ACCEPT_FACTOR, QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT
except ImportError:
    QUAD_EPSREL = 1e-12
    QUAD_EPSABS = 1e-14
    QUAD_LIMIT = 500
    QUAD_ACCEPT_FACTOR = 1e3

if TYPE_CHECKING:
    from src.kernel.kernels import KernelSpec

logger = get_logger(__name__)

# below this many oscillations per interval a plain rule is used
_OSCILLATION_CUTOFF = 2.0 * math.pi


def quad_checked(
    func: Callable[[float], float],
    a: float,
    b: float,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
    **kwargs: Any,
) -> Tuple[float, float]:
    """scipy quad with warnings captured; returns (value, abserr)"""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            func, a, b, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT, **kwargs
        )
    if not np.isfinite(value):
        raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
    return float(value), float(abserr)


def _accept(
    value: complex, abserr: float, epsabs: float, epsrel: float, what: str
) -> None:
    allowed = QUAD_ACCEPT_FACTOR * max(epsabs, epsrel * abs(value))
    if abserr > allowed:
        raise QuadratureFailure(
            f"{what}: error estimate {abserr:.3e} exceeds {allowed:.3e}"
        )
    logger.debug("%s: abserr %.3e", what, abserr)


def _origin_options(kernel: "KernelSpec", upper: float) -> Dict[str, Any]:
    """quad options on (0, upper): algebraic weight for a singular kernel"""
    power = kernel.singular_exponent
    if power != 0.0:
        return {"weight": "alg", "wvar": (power, 0.0)}
    return {"points": kernel.breakpoints(0.0, upper)}


def laplace_quadrature(
    kernel: "KernelSpec",
    lam: complex,
    order: int = 0,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
) -> complex:
    """j-th derivative of b^ at lam: integral of (-t)^j e^{-lam t} b(t) over the support

    The interval is split at min(support, 1/|lam|, 1). The piece touching 0 uses
    an algebraic weight for the kernel's local power; the remainder uses a
    Fourier weight when it oscillates.
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise NonanalyticPoint(f"Re(lambda) must be positive, got {lam}")
    sigma, omega = lam.real, lam.imag
    support = kernel.support
    split = min(support, 1.0 / abs(lam), 1.0)
    power = kernel.singular_exponent
    sign = -1.0 if order % 2 else 1.0

    def near(t: float) -> complex:
        return complex(kernel.regular_part(t)) * t ** order * np.exp(-lam * t)

    total = 0j
    error = 0.0
    options = _origin_options(kernel, split)
    re, e1 = quad_checked(lambda t: near(t).real, 0.0, split, **options)
    im, e2 = quad_checked(lambda t: near(t).imag, 0.0, split, **options)
    total += complex(re, im)
    error += e1 + e2

    if split < support:

        def density(t: float) -> float:
            return float(kernel.regular_part(t)) * t ** (order + power)

        def damped(t: float) -> float:
            return density(t) * math.exp(-sigma * t)

        infinite = math.isinf(support)
        long_range = infinite or abs(omega) * (support - split) > _OSCILLATION_CUTOFF
        oscillating = omega != 0.0 and long_range
        if oscillating:
            cos_part, e1 = quad_checked(
                damped, split, support, weight="cos", wvar=omega
            )
            sin_part, e2 = quad_checked(
                damped, split, support, weight="sin", wvar=omega
            )
            total += complex(cos_part, -sin_part)
        else:

            def far(t: float) -> complex:
                return density(t) * np.exp(-lam * t)

            points = None if infinite else kernel.breakpoints(split, support)
            re, e1 = quad_checked(lambda t: far(t).real, split, support, points=points)
            im, e2 = quad_checked(lambda t: far(t).imag, split, support, points=points)
            total += complex(re, im)
        error += e1 + e2

    _accept(total, error, epsabs, epsrel, f"laplace order {order} at {lam}")
    return sign * total


def primitive_quadrature(kernel: "KernelSpec", t: float, order: int = 1) -> float:
    """B_m(t) = integral over (0, t) of (t - s)^{m-1}/(m-1)! b(s) ds"""
    if t <= 0.0:
        return 0.0
    upper = min(t, kernel.support)
    scale = 1.0 / math.factorial(order - 1)

    def weight(s: float) -> float:
        return (t - s) ** (order - 1) * scale

    value, err = quad_checked(
        lambda s: float(kernel.regular_part(s)) * weight(s),
        0.0,
        upper,
        **_origin_options(kernel, upper),
    )
    _accept(value, err, QUAD_EPSABS, 1e-10, f"primitive order {order} at t={t}")
    return value


def abs_integral_quadrature(kernel: "KernelSpec", t: float) -> float:
    """L1 norm of b over (0, t) for kernels of indefinite sign"""
    upper = min(t, kernel.support)
    value, _ = quad_checked(
        lambda s: abs(float(kernel.regular_part(s))),
        0.0,
        upper,
        **_origin_options(kernel, upper),
    )
    return value
