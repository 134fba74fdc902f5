"""
Numerical certification of the structural assumptions on a memory kernel
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, optimize

from src.kernel.kernels import KernelSpec
from src.utils.errors import BoundaryLimitUnstable, ParameterOutOfRange
from src.utils.fitting import LogLogFit, fit_loglog
from src.utils.log import get_logger

from config.settings import (
    B_SMOOTH_BOUND,
    B_SMOOTH_RANGE,
    BOUNDARY_EPS,
    BOUNDARY_EPS_CHECK,
    BOUNDARY_REL_TOL,
    GROWTH_DRIFT_TOL,
    GROWTH_MU_GRID,
    GROWTH_RATIO_BOUND,
    GROWTH_TRUNCATION,
    LP_EXPONENTS,
    MONOTONE_MAX_ORDER,
    MONOTONE_TOLERANCE,
    REGULARITY_REFINEMENT_TOL,
    SECTOR_RADII,
    SECTOR_SAMPLES,
)

logger = get_logger(__name__)

POINTS_PER_DECADE = 64


@dataclass(frozen=True)
class ContourSampling:
    """Sample points in the closed upper-right quarter plane.

    Kernels are real, so b^(conj lam) = conj b^(lam) and the lower half
    mirrors the upper one.
    """

    n_angles: int = 8
    n_radii: int = 60
    radii: Tuple[float, float] = SECTOR_RADII
    n_axis: int = SECTOR_SAMPLES
    eps: float = BOUNDARY_EPS

    def refined(self) -> "ContourSampling":
        return replace(
            self,
            n_angles=self.n_angles + 2,
            n_radii=2 * self.n_radii,
            n_axis=2 * self.n_axis,
        )

    def angles(self) -> np.ndarray:
        # theta increases towards pi/2
        return 0.5 * math.pi * (1.0 - 2.0 ** -np.arange(self.n_angles, dtype=float))

    def axis_heights(self) -> np.ndarray:
        return np.geomspace(self.radii[0], self.radii[1], self.n_axis)

    def points(self) -> np.ndarray:
        radii = np.geomspace(self.radii[0], self.radii[1], self.n_radii)
        rays = (radii[None, :] * np.exp(1j * self.angles()[:, None])).ravel()
        axis = self.eps + 1j * self.axis_heights()
        return np.concatenate((rays, axis))


REGULARITY_SAMPLING = ContourSampling(n_angles=4, n_radii=24, n_axis=48)


# -- sector condition -------------------------------------------------------


def sector_angle(
    kernel: KernelSpec, sampling: Optional[ContourSampling] = None
) -> Tuple[float, float]:
    """Sampled sup |arg b^(lam)| over Re lam > 0 and the matching rho"""
    sampling = sampling or ContourSampling()
    points = sampling.points()
    angles = np.abs(np.angle(kernel.laplace(points)))
    best = int(np.argmax(angles))
    angle = float(angles[best])

    # refine between neighbouring samples on the imaginary axis
    n_rays = sampling.n_angles * sampling.n_radii
    if best >= n_rays:
        heights = np.log(sampling.axis_heights())
        i = best - n_rays
        lo, hi = heights[max(i - 1, 0)], heights[min(i + 1, heights.size - 1)]
        if hi > lo:

            def negative_angle(y: float) -> float:
                lam = sampling.eps + 1j * math.exp(y)
                return -abs(np.angle(complex(kernel.laplace(lam))))

            result = optimize.minimize_scalar(
                negative_angle,
                bounds=(lo, hi),
                method="bounded",
            )
            angle = max(angle, float(-result.fun))
    rho_sector = 1.0 + 2.0 * angle / math.pi
    logger.info("sector angle %.6f rad (rho_sector %.4f)", angle, rho_sector)
    return angle, rho_sector


# -- k-regularity ------------------------------------------------------------


@dataclass
class RegularityConstants:
    constants: Dict[int, float]
    refined: Dict[int, float]
    passed: bool


def _regularity_sup(
    kernel: KernelSpec, order: int, sampling: ContourSampling
) -> Dict[int, float]:
    points = sampling.points()
    base = np.abs(kernel.laplace(points))
    sups = {0: 1.0}
    for j in range(1, order + 1):
        derivative = np.abs(kernel.laplace_derivative(points, j))
        ratio = np.abs(points) ** j * derivative / base
        sups[j] = float(np.max(ratio))
    return sups


def check_k_regularity(
    kernel: KernelSpec, order: int = 2, sampling: Optional[ContourSampling] = None
) -> RegularityConstants:
    """sup |lam|^j |b^(j)(lam)| / |b^(lam)| for j <= order, checked under refinement"""
    if not 0 <= order <= 3:
        raise ParameterOutOfRange(f"regularity order must be in 0..3, got {order}")
    sampling = sampling or REGULARITY_SAMPLING
    coarse = _regularity_sup(kernel, order, sampling)
    fine = _regularity_sup(kernel, order, sampling.refined())
    passed = all(
        math.isfinite(fine[j])
        and abs(fine[j] - coarse[j])
        <= REGULARITY_REFINEMENT_TOL * max(coarse[j], 1e-300)
        for j in coarse
    )
    return RegularityConstants(constants=coarse, refined=fine, passed=passed)


# -- growth conditions ------------------------------------------------------


class BoundaryFunction:
    """|g^(j)(k)| = |b^(j)(eps + ik)| on a log-spaced master grid"""

    def __init__(
        self,
        kernel: KernelSpec,
        k_range: Tuple[float, float],
        eps: float = BOUNDARY_EPS,
        check_eps: float = BOUNDARY_EPS_CHECK,
        rel_tol: float = BOUNDARY_REL_TOL,
    ) -> None:
        self.kernel = kernel
        decades = math.log10(k_range[1] / k_range[0])
        n_points = int(round(decades * POINTS_PER_DECADE)) + 1
        self.k = np.geomspace(k_range[0], k_range[1], n_points)
        lam = eps + 1j * self.k
        self.values = [np.abs(kernel.laplace_derivative(lam, j)) for j in range(4)]
        stride = 1 if _closed_form(kernel) else 25
        sample_k = self.k[::stride]
        first = self.values[0][::stride]
        second = np.abs(kernel.laplace(check_eps + 1j * sample_k))
        disagreement = np.abs(first - second) / np.maximum(second, 1e-300)
        if np.any(disagreement > rel_tol):
            worst = int(np.argmax(disagreement))
            raise BoundaryLimitUnstable(
                f"boundary values at k={sample_k[worst]:.3e} "
                f"differ by {disagreement[worst]:.2e} "
                f"between eps={eps} and eps={check_eps}"
            )


def _closed_form(kernel: KernelSpec) -> bool:
    return type(kernel)._laplace_derivative is not KernelSpec._laplace_derivative


def _integrate_log(values: np.ndarray, y: np.ndarray, truncation: float) -> float:
    """Integral over y of a positive bump on a uniform y grid, with power-law tails"""
    peak_index = int(np.argmax(values))
    peak = values[peak_index]
    if not np.isfinite(peak) or peak <= 0:
        return math.inf
    keep = values >= truncation * peak
    lo = peak_index
    while lo > 0 and keep[lo - 1]:
        lo -= 1
    hi = peak_index
    while hi < values.size - 1 and keep[hi + 1]:
        hi += 1
    if hi - lo < 2:
        raise ParameterOutOfRange("growth integrand not resolved by the k grid")
    body = integrate.simpson(values[lo:hi + 1], x=y[lo:hi + 1])
    dy = y[1] - y[0]
    # exponential decay in y is power-law decay in k
    tail = 0.0
    for edge, inner in ((hi, hi - 1), (lo, lo + 1)):
        rate = math.log(values[inner] / values[edge]) / dy
        tail += values[edge] / rate if rate > 0 else math.inf
    return float(body + tail)


@dataclass
class GrowthIntegrals:
    mu: np.ndarray
    first: np.ndarray  # integral of |g| / (k + mu|g|)^2
    second: np.ndarray  # integral of (k^2|g'''| + k|g''| + |g'| + 1/mu) / (k + mu|g|)^2

    def rho_growth(self) -> float:
        """rho from the fitted mu-slope of the second integral, slope = -(1 + 1/rho)"""
        fit = fit_loglog(self.mu, self.second)
        return -1.0 / (1.0 + fit.slope)


def growth_integrals(
    kernel: KernelSpec,
    mu_grid: Optional[Sequence[float]] = None,
    k_range: Optional[Tuple[float, float]] = None,
    truncation: float = GROWTH_TRUNCATION,
) -> GrowthIntegrals:
    """Both growth integrals for every mu on one shared boundary-function grid"""
    mu = default_mu_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if np.any(mu <= 0):
        raise ParameterOutOfRange("mu grid must be positive")
    if k_range is None:
        k_range = (BOUNDARY_EPS / BOUNDARY_REL_TOL, 1e14)
    g = BoundaryFunction(kernel, k_range)
    k = g.k
    y = np.log(k)
    first, second = [], []
    for m in mu:
        denominator = (k + m * g.values[0]) ** 2
        f1 = g.values[0] / denominator * k
        numerator = k ** 2 * g.values[3] + k * g.values[2] + g.values[1] + 1.0 / m
        f2 = numerator / denominator * k
        first.append(_integrate_log(f1, y, truncation))
        second.append(_integrate_log(f2, y, truncation))
    return GrowthIntegrals(mu=mu, first=np.array(first), second=np.array(second))


def default_mu_grid() -> np.ndarray:
    start, stop, count = GROWTH_MU_GRID
    return np.geomspace(start, stop, int(count))


@dataclass
class GrowthReport:
    rho_candidate: float
    mu: np.ndarray
    first_product: np.ndarray  # mu * I1
    second_product: np.ndarray  # mu^{1+1/rho} * I2
    first_ratio: float
    second_ratio: float
    first_drift: float
    second_drift: float
    rho_growth: float
    passed_first: bool
    passed_second: bool

    @property
    def passed(self) -> bool:
        return self.passed_first and self.passed_second


def evaluate_growth(
    integrals: GrowthIntegrals,
    rho_candidate: float,
    ratio_bound: float = GROWTH_RATIO_BOUND,
    drift_tol: float = GROWTH_DRIFT_TOL,
) -> GrowthReport:
    """Bounded means max/min <= ratio_bound and |log-log drift in mu| <= drift_tol"""
    mu = integrals.mu
    p1 = mu * integrals.first
    p2 = mu ** (1.0 + 1.0 / rho_candidate) * integrals.second
    verdicts = []
    summary = []
    for product in (p1, p2):
        if not np.all(np.isfinite(product)) or np.any(product <= 0):
            summary.append((math.inf, math.inf))
            verdicts.append(False)
            continue
        ratio = float(product.max() / product.min())
        drift = fit_loglog(mu, product).slope
        summary.append((ratio, drift))
        verdicts.append(ratio <= ratio_bound and abs(drift) <= drift_tol)
    return GrowthReport(
        rho_candidate=rho_candidate,
        mu=mu,
        first_product=p1,
        second_product=p2,
        first_ratio=summary[0][0],
        second_ratio=summary[1][0],
        first_drift=summary[0][1],
        second_drift=summary[1][1],
        rho_growth=integrals.rho_growth(),
        passed_first=verdicts[0],
        passed_second=verdicts[1],
    )


def check_growth_conditions(
    kernel: KernelSpec,
    mu_grid: Optional[Sequence[float]] = None,
    rho_candidate: Optional[float] = None,
) -> GrowthReport:
    """mu I1(mu) and mu^{1+1/rho} I2(mu) over a mu grid of at least four decades"""
    integrals = growth_integrals(kernel, mu_grid)
    if integrals.mu.max() / integrals.mu.min() < 1e4:
        raise ParameterOutOfRange("mu grid must span at least four decades")
    candidate = rho_candidate if rho_candidate is not None else integrals.rho_growth()
    report = evaluate_growth(integrals, candidate)
    logger.info(
        "growth conditions at rho=%.4f: ratios %.3g / %.3g, drifts %.4f / %.4f",
        candidate,
        report.first_ratio,
        report.second_ratio,
        report.first_drift,
        report.second_drift,
    )
    return report


def scan_growth_candidates(
    kernel: KernelSpec,
    candidates: Sequence[float],
    mu_grid: Optional[Sequence[float]] = None,
) -> Dict[float, bool]:
    """Growth verdict for each candidate rho, integrals computed once"""
    integrals = growth_integrals(kernel, mu_grid)
    return {float(c): evaluate_growth(integrals, float(c)).passed for c in candidates}


def lp_integrability(
    kernel: KernelSpec,
    exponents: Sequence[int] = LP_EXPONENTS,
    k_range: Tuple[float, float] = (BOUNDARY_EPS / BOUNDARY_REL_TOL, 1e14),
) -> Optional[int]:
    """Smallest p with g/(|k| + |g|) in L^p, judged from the large-k decay"""
    g = BoundaryFunction(kernel, k_range)
    ratio = g.values[0] / (g.k + g.values[0])
    top = g.k >= g.k[-1] / 100.0
    for p in exponents:
        # integrable at infinity iff h^p decays faster than 1/k
        fit = fit_loglog(g.k[top], ratio[top] ** p)
        if fit.slope < -1.0 - 0.05:
            return int(p)
    return None


# -- time-domain conditions --------------------------------------------------


def _default_time_grid(kernel: KernelSpec, n: int = 400) -> np.ndarray:
    times = getattr(kernel, "times", None)
    if times is not None:
        return np.geomspace(max(times[0], 1e-4), times[-1], n)
    return np.geomspace(1e-4, 10.0, n)


def check_monotonicity(
    kernel: KernelSpec,
    order: int = MONOTONE_MAX_ORDER,
    grid: Optional[Sequence[float]] = None,
) -> int:
    """Order to which b is completely monotone on the grid.

    Returns the largest k <= order such that every divided difference of order
    n <= k has the sign of (-1)^n, i.e. b is k-monotone; 4 is what the
    resolvent estimates need. -1 means b itself takes negative values.
    """
    t = _default_time_grid(kernel) if grid is None else np.asarray(grid, dtype=float)
    values = np.asarray(kernel.evaluate(t), dtype=float)
    diff = values.copy()
    bound = np.abs(values)
    eps = np.finfo(float).eps
    verified = -1
    for n in range(order + 1):
        if n > 0:
            span = t[n:] - t[:-n]
            diff = (diff[1:] - diff[:-1]) / span
            bound = (bound[1:] + bound[:-1]) / span
        signed = (-1.0) ** n * diff
        if np.any(signed < -(MONOTONE_TOLERANCE + 64.0 * eps * bound)):
            break
        verified = n
    return verified


@dataclass
class BSmoothResult:
    t: np.ndarray
    ratio: np.ndarray
    bounded_small: bool
    bounded_large: bool

    @property
    def passed(self) -> bool:
        return self.bounded_small and self.bounded_large


def b_smooth_ratio(kernel: KernelSpec, t: ArrayLike) -> np.ndarray:
    """(1/t) int_0^t s b(s) ds  /  int_0^t -s b'(s) ds, both integrated by parts"""
    t = np.asarray(t, dtype=float)
    b1 = kernel.primitive(t, 1)
    b2 = kernel.primitive(t, 2)
    numerator = b1 - b2 / t
    denominator = b1 - t * kernel.evaluate(t)
    return numerator / denominator


def check_b_smooth(
    kernel: KernelSpec,
    t_grid: Optional[Sequence[float]] = None,
    bound: float = B_SMOOTH_BOUND,
) -> BSmoothResult:
    if t_grid is None:
        t_grid = np.geomspace(B_SMOOTH_RANGE[0], B_SMOOTH_RANGE[1], 121)
    t = np.asarray(t_grid, dtype=float)
    ratio = b_smooth_ratio(kernel, t)
    decade = max(t.size // 12, 2)

    def ok(chunk: np.ndarray) -> bool:
        finite = np.all(np.isfinite(chunk))
        return bool(finite and np.all(chunk > 0) and np.all(chunk <= bound))

    return BSmoothResult(
        t=t,
        ratio=ratio,
        bounded_small=ok(ratio[:decade]),
        bounded_large=ok(ratio[-decade:]),
    )


def l1_norm_scaling(
    kernel: KernelSpec, t_grid: Optional[Sequence[float]] = None
) -> LogLogFit:
    """Log-log slope of ||b||_{L1(0,t)} in t"""
    if t_grid is None:
        t_grid = np.geomspace(1e-6, 1e-2, 25)
    t = np.asarray(t_grid, dtype=float)
    return fit_loglog(t, kernel.l1_norm(t))


# -- full certification ------------------------------------------------------


@dataclass
class AssumptionReport:
    kernel: Dict[str, object]
    sector_angle: float
    rho_sector: float
    rho_growth: float
    regularity_constants: Dict[int, float]
    regularity_passed: bool
    growth: GrowthReport
    growth_scan: Dict[float, bool] = field(default_factory=dict)
    lp_exponent: Optional[int] = None
    monotone_order: Optional[int] = None
    b_smooth: Optional[BSmoothResult] = None
    l1_slope: Optional[float] = None

    @property
    def verdict(self) -> Dict[str, Optional[bool]]:
        return {
            "sector": 0.0 <= self.sector_angle < 0.5 * math.pi
            and 1.0 < self.rho_sector < 2.0,
            "regularity": self.regularity_passed,
            "growth_first": self.growth.passed_first,
            "growth_second": self.growth.passed_second,
            "lp_integrability": self.lp_exponent is not None,
            "monotone": (
                None if self.monotone_order is None else self.monotone_order >= 4
            ),
            "b_smooth": None if self.b_smooth is None else self.b_smooth.passed,
        }

    @property
    def passed(self) -> bool:
        v = self.verdict
        required = ("sector", "regularity", "growth_first", "growth_second")
        return all(bool(v[name]) for name in required)

    def growth_interval(self) -> Optional[Tuple[float, float]]:
        accepted = [rho for rho, ok in sorted(self.growth_scan.items()) if ok]
        if not accepted:
            return None
        return accepted[0], accepted[-1]

    def records(self) -> List[Dict[str, object]]:
        """One {name, value, threshold, pass} object per condition"""
        v = self.verdict
        rows: List[Dict[str, object]] = [
            {
                "name": "sector_angle",
                "value": self.sector_angle,
                "threshold": 0.5 * math.pi,
                "pass": v["sector"],
            },
            {
                "name": "rho_sector",
                "value": self.rho_sector,
                "threshold": [1.0, 2.0],
                "pass": v["sector"],
            },
            {
                "name": "rho_growth",
                "value": self.rho_growth,
                "threshold": [1.0, 2.0],
                "pass": 1.0 < self.rho_growth < 2.0,
            },
        ]
        for j, value in sorted(self.regularity_constants.items()):
            rows.append({
                "name": f"regularity_order_{j}",
                "value": value,
                "threshold": "stable under refinement",
                "pass": v["regularity"],
            })
        g = self.growth
        rows.append({
            "name": "growth_first",
            "value": g.first_ratio,
            "threshold": GROWTH_RATIO_BOUND,
            "pass": g.passed_first,
            "rho_candidate": g.rho_candidate,
            "drift": g.first_drift,
            "products": g.first_product,
            "mu": g.mu,
        })
        rows.append({
            "name": "growth_second",
            "value": g.second_ratio,
            "threshold": GROWTH_RATIO_BOUND,
            "pass": g.passed_second,
            "rho_candidate": g.rho_candidate,
            "drift": g.second_drift,
            "products": g.second_product,
            "mu": g.mu,
        })
        interval = self.growth_interval()
        if self.growth_scan:
            rows.append({
                "name": "growth_rho_interval",
                "value": list(interval) if interval else None,
                "threshold": sorted(self.growth_scan),
                "pass": interval is not None,
            })
        rows.append({
            "name": "lp_integrability",
            "value": self.lp_exponent,
            "threshold": list(LP_EXPONENTS),
            "pass": v["lp_integrability"],
        })
        if self.monotone_order is not None:
            rows.append({
                "name": "monotone_order",
                "value": self.monotone_order,
                "threshold": 4,
                "pass": v["monotone"],
            })
        if self.b_smooth is not None:
            finite = self.b_smooth.ratio[np.isfinite(self.b_smooth.ratio)]
            rows.append({
                "name": "b_smooth_ratio",
                "value": float(finite.max()) if finite.size else None,
                "threshold": B_SMOOTH_BOUND,
                "pass": v["b_smooth"],
            })
        if self.l1_slope is not None:
            rows.append({
                "name": "l1_norm_slope",
                "value": self.l1_slope,
                "threshold": self.rho_sector - 1.0,
                "pass": None,
            })
        return rows

    def to_dict(self) -> Dict[str, object]:
        return {
            "kernel": self.kernel,
            "passed": self.passed,
            "conditions": self.records(),
        }


def certify_kernel(
    kernel: KernelSpec,
    mu_grid: Optional[Sequence[float]] = None,
    rho_candidates: Optional[Sequence[float]] = None,
    sampling: Optional[ContourSampling] = None,
) -> AssumptionReport:
    """Run every kernel check and assemble the report"""
    logger.info("certifying %r", kernel)
    angle, rho_sector = sector_angle(kernel, sampling)
    regularity = check_k_regularity(kernel, order=2)
    integrals = growth_integrals(kernel, mu_grid)
    rho_growth = integrals.rho_growth()
    candidate = kernel.rho if kernel.rho is not None else rho_growth
    growth = evaluate_growth(integrals, candidate)
    if rho_candidates is None:
        centre = round(candidate, 2)
        rho_candidates = [round(centre + 0.01 * i, 2) for i in range(-5, 6)]
    scan = {
        float(c): evaluate_growth(integrals, float(c)).passed for c in rho_candidates
    }
    report = AssumptionReport(
        kernel=kernel.describe(),
        sector_angle=angle,
        rho_sector=rho_sector,
        rho_growth=rho_growth,
        regularity_constants=regularity.constants,
        regularity_passed=regularity.passed,
        growth=growth,
        growth_scan=scan,
        lp_exponent=lp_integrability(kernel),
    )
    if kernel.has_time_domain:
        report.monotone_order = check_monotonicity(kernel)
        report.b_smooth = check_b_smooth(kernel)
        report.l1_slope = l1_norm_scaling(kernel).slope
    else:
        logger.info("kernel has no time-domain evaluator; time-domain checks skipped")
    outcome = "passed" if report.passed else "failed"
    logger.info("certification %s (rho_growth %.4f)", outcome, rho_growth)
    return report
