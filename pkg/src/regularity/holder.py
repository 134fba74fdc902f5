"""
Temporal Hoelder exponents of ensemble solutions in H^s
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from config.settings import (
    HOLDER_CI_LIMIT,
    HOLDER_MIN_LAGS,
    PATHWISE_MIN_PATHS,
    SLOPE_TOLERANCE,
    STABILITY_TOL,
    TRUNCATION_SHARE,
)
from src.solver.ensemble import EnsembleResult
from src.utils.errors import (
    EnsembleTooSmall,
    LagOutOfRange,
    ParameterOutOfRange,
    SpectralTruncationDominates,
)
from src.utils.fitting import LogLogFit, fit_loglog
from src.utils.log import get_logger

logger = get_logger(__name__)


def kappa_value(r: float, s: float, rho: float) -> float:
    """kappa = (r - s - 1) rho"""
    return (r - s - 1.0) * rho


def predicted_exponent(kappa: float) -> float:
    return min(0.5, kappa / 2.0 + 1.0)


def pathwise_bound(r: float, s: float, rho: float, p: float) -> float:
    """Largest admissible pathwise exponent min{1/2, kappa/2+1} - 1/p"""
    return predicted_exponent(kappa_value(r, s, rho)) - 1.0 / p


def _lag_columns(ensemble: EnsembleResult, lags: Optional[Sequence[int]]) -> List[int]:
    plan_lags = list(ensemble.plan.lags)
    if lags is None:
        return list(range(len(plan_lags)))
    columns = []
    for lag in lags:
        if lag not in plan_lags:
            raise LagOutOfRange(
                f"lag of {lag} steps was not measured; plan has {plan_lags}"
            )
        columns.append(plan_lags.index(lag))
    return columns


def truncation_remainder(ensemble: EnsembleResult, s: float) -> float:
    """E ||u(t+h) - u(t)||^2 in H^s carried by the modes the basis leaves out.

    An omitted mode k relaxes within any measured lag, so it adds about
    2 q_k lambda_k^s int_0^T s_k^2 to every increment. The per-mode values of
    the top octave of the basis are extended to k > N as a power law in k.
    Zero unless the solution is the stochastic convolution of additive noise.
    """
    problem = ensemble.problem
    bank = ensemble.bank
    if bank is None or not problem.constant_map or problem.g_map.is_zero:
        return 0.0
    n = bank.n_modes
    if n < 8:
        return 0.0
    k = np.arange(1, n + 1, dtype=float)
    top = k > n // 2
    energy = 2.0 * bank.basis.powers(s) * bank.energy()
    fit = fit_loglog(k[top], energy[top])
    decay = -fit.slope
    at_n = fit.constant * n ** fit.slope
    cov = problem.cov
    if cov.kind == "custom":
        extra = np.asarray(cov.values[n:], dtype=float)
        listed = np.arange(n + 1, n + 1 + extra.size, dtype=float)
        return float(np.sum(extra * at_n * (listed / n) ** (-decay)))
    if cov.kind == "power":
        at_n *= (n * math.pi) ** (-2.0 * cov.gamma)
        decay += 2.0 * cov.gamma
    if decay <= 1.0:
        return math.inf
    return float(at_n * n ** decay * special.zeta(decay, n + 1))


@dataclass
class HolderEstimate:
    """Slope of the mean-p increment norm D(h) against h"""

    s: float
    p: float
    kappa: float
    predicted: float
    h: np.ndarray
    increments: np.ndarray  # D(h), base points averaged
    sup_increments: np.ndarray  # (E sup_t ||u(t+h) - u(t)||^p)^{1/p}
    fit: LogLogFit
    sup_fit: LogLogFit
    remainder: float = 0.0
    # share of D(h)^2 the omitted modes would add, per fitted lag
    shares: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dropped: List[float] = field(default_factory=list)

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def ci(self) -> float:
        return self.fit.half_width

    def passed(self, tolerance: float = SLOPE_TOLERANCE) -> bool:
        return abs(self.slope - self.predicted) <= tolerance

    def to_dict(self, tolerance: float = SLOPE_TOLERANCE) -> Dict[str, object]:
        return {
            "s": self.s,
            "p": self.p,
            "kappa": self.kappa,
            "predicted": self.predicted,
            "slope": self.slope,
            "ci": self.ci,
            "sup_slope": self.sup_fit.slope,
            "h": self.h,
            "D": self.increments,
            "D_sup": self.sup_increments,
            "truncation_remainder": self.remainder,
            "truncation_share": float(np.max(self.shares, initial=0.0)),
            "dropped_lags": self.dropped,
            "pass": self.passed(tolerance),
        }


def estimate_holder(
    ensemble: EnsembleResult,
    s: float,
    p: Optional[float] = None,
    lags: Optional[Sequence[int]] = None,
    ci_limit: float = HOLDER_CI_LIMIT,
    strict: bool = True,
    max_share: float = TRUNCATION_SHARE,
) -> HolderEstimate:
    """Log-log fit of the increment moment D(h) against h.

    D(h) = (E ||u(t+h) - u(t)||^p)^{1/p}, averaged over base points. Lags
    where the modes beyond the basis would carry more than max_share of
    D(h)^2 are left out of the fit; SpectralTruncationDominates when fewer
    than HOLDER_MIN_LAGS remain.
    """
    problem = ensemble.problem
    p = p or problem.p
    if s >= problem.holder_ceiling:
        raise ParameterOutOfRange(
            f"s={s} must stay below r - 1 + 2/rho = {problem.holder_ceiling:.6g}"
        )
    columns = _lag_columns(ensemble, lags)
    if len(columns) < HOLDER_MIN_LAGS:
        raise LagOutOfRange(
            f"{len(columns)} lags given, at least {HOLDER_MIN_LAGS} needed"
        )
    a = ensemble.s_index(s)
    h = np.array([ensemble.plan.lags[c] for c in columns]) * ensemble.grid.dt
    at_base = ensemble.increments[:, a, columns, :] ** p  # (paths, lags, base)
    D = (at_base.mean(axis=0) ** (1.0 / p)).mean(axis=1)
    D_sup = (ensemble.sup_increments[:, a, columns] ** p).mean(axis=0) ** (1.0 / p)

    remainder = truncation_remainder(ensemble, s)
    if math.isfinite(remainder):
        shares = remainder / (D ** 2 + remainder)
    else:
        shares = np.ones_like(D)
    resolved = shares <= max_share
    dropped = [float(x) for x in h[~resolved]]
    if dropped:
        logger.warning(
            "s=%.4g: omitted modes carry up to %.0f%% of D(h)^2; lags %s left out",
            s,
            100.0 * float(shares.max()),
            dropped,
        )
    if int(resolved.sum()) < HOLDER_MIN_LAGS:
        raise SpectralTruncationDominates(
            f"s={s}: the modes beyond N={ensemble.problem.basis.n_modes} "
            f"carry {float(shares.max()):.0%} of D(h)^2; "
            f"{int(resolved.sum())} lags remain below the {max_share:.0%} share, "
            f"{HOLDER_MIN_LAGS} needed (raise the mode count)"
        )
    h, D, D_sup = h[resolved], D[resolved], D_sup[resolved]

    fit = fit_loglog(h, D)
    sup_fit = fit_loglog(h, D_sup)
    kappa = kappa_value(problem.r, s, problem.rho)
    estimate = HolderEstimate(
        s,
        p,
        kappa,
        predicted_exponent(kappa),
        h,
        D,
        D_sup,
        fit,
        sup_fit,
        remainder,
        shares[resolved],
        dropped,
    )
    logger.info(
        "holder s=%.4g: slope %.4f +- %.4f, predicted %.4f",
        s,
        fit.slope,
        fit.half_width,
        estimate.predicted,
    )
    if strict and estimate.ci > ci_limit:
        raise EnsembleTooSmall(
            f"s={s}: confidence half-width {estimate.ci:.3f} exceeds {ci_limit}; "
            "add paths"
        )
    return estimate


@dataclass
class PathwiseQuotients:
    """Per-path sup over lag pairs of ||u(t+h) - u(t)|| / h^beta for one beta"""

    beta: float
    bound: float  # min{1/2, kappa/2+1} - 1/p
    median: float
    p95: float
    # 95th percentiles of the quotient restricted to the finest and next-finest lag
    p95_finest: float
    p95_next: float

    @property
    def growth(self) -> float:
        """Relative change of the percentile when the lag is halved"""
        return self.p95_finest / self.p95_next - 1.0

    @property
    def stable(self) -> bool:
        return bool(np.isfinite(self.p95)) and self.growth <= STABILITY_TOL

    def to_dict(self) -> Dict[str, object]:
        return {
            "beta": self.beta,
            "bound": self.bound,
            "median": self.median,
            "p95": self.p95,
            "p95_finest": self.p95_finest,
            "p95_next": self.p95_next,
            "growth": self.growth,
            "stable": self.stable,
        }


def pathwise_holder(
    ensemble: EnsembleResult,
    s: float,
    beta_grid: Sequence[float],
    p: Optional[float] = None,
    allow_inadmissible: bool = False,
) -> List[PathwiseQuotients]:
    """Distribution over paths of the Hoelder quotient and its growth as h halves.

    Every beta must lie below min{1/2, kappa/2+1} - 1/p unless allow_inadmissible
    is set, which is how divergence above the bound is shown.
    """
    if ensemble.n_paths < PATHWISE_MIN_PATHS:
        raise EnsembleTooSmall(
            f"pathwise quotients need {PATHWISE_MIN_PATHS} paths, "
            f"got {ensemble.n_paths}"
        )
    problem = ensemble.problem
    p = p or problem.p
    bound = pathwise_bound(problem.r, s, problem.rho, p)
    if not allow_inadmissible:
        above = [beta for beta in beta_grid if beta >= bound]
        if above:
            raise ParameterOutOfRange(
                f"beta {above} not below the admissible bound {bound:.4g} "
                f"at s={s}, p={p}"
            )
    a = ensemble.s_index(s)
    lags = np.asarray(ensemble.plan.lags)
    if lags.size < 2:
        raise LagOutOfRange("pathwise quotients need at least two lags")
    h = lags * ensemble.grid.dt
    order = np.argsort(lags)
    finest, following = int(order[0]), int(order[1])
    sup = ensemble.sup_increments[:, a, :]  # (paths, lags)
    results = []
    for beta in beta_grid:
        quotients = sup / h[None, :] ** beta
        full = quotients.max(axis=1)
        results.append(PathwiseQuotients(
            beta=float(beta),
            bound=bound,
            median=float(np.median(full)),
            p95=float(np.percentile(full, 95)),
            p95_finest=float(np.percentile(quotients[:, finest], 95)),
            p95_next=float(np.percentile(quotients[:, following], 95)),
        ))
    return results
