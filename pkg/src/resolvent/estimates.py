"""
Weighted L1 norms of the scalar resolvent and their scaling in mu
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

from config.settings import CONTRACTION_SLACK, HORIZON_TAIL_LIMIT
from src.kernel.kernels import KernelSpec
from src.resolvent.grid import TimeGrid
from src.resolvent.scalar import ScalarResolventTable, solve_scalar_parallel
from src.utils.errors import HorizonTooShort, ParameterOutOfRange
from src.utils.fitting import LogLogFit, fit_loglog
from src.utils.log import get_logger

logger = get_logger(__name__)

NORM_NAMES = ("s", "sdot", "t_sdot", "t_sddot", "t2_sddot")


def _tail(t: np.ndarray, integrand: np.ndarray) -> float:
    """Integral over (T, inf) of a power law fitted to the envelope on [T/2, T]"""
    window = t >= t[-1] / 2.0
    tt = t[window]
    envelope = np.maximum.accumulate(np.abs(integrand[window])[::-1])[::-1]
    if tt.size < 3 or envelope[-1] <= 0.0:
        return 0.0
    fit = fit_loglog(tt, envelope)
    if fit.slope >= -1.0:
        return math.inf
    return float(envelope[-1] * tt[-1] / (-fit.slope - 1.0))


def resolvent_norms(
    table: ScalarResolventTable, local_power: float
) -> Dict[str, float]:
    """Trapezoidal L1 norms on [0, T]; s'' norms add the first interval analytically.

    Near 0, s'' behaves like t^p with p the kernel's local power, so
    int_0^{t1} t^m |s''| = |s''(t1)| t1^{m+1} / (p+m+1).
    """
    t, s, sdot, sddot = table.t, table.s, table.sdot, table.sddot
    t1, lead = t[1], abs(sddot[1])
    t_in, sddot_in = t[1:], np.abs(sddot[1:])
    return {
        "s": float(integrate.trapezoid(np.abs(s), t)),
        "sdot": float(integrate.trapezoid(np.abs(sdot), t)),
        "t_sdot": float(integrate.trapezoid(t * np.abs(sdot), t)),
        "t_sddot": float(integrate.trapezoid(t_in * sddot_in, t_in))
        + lead * t1 ** 2 / (local_power + 2.0),
        "t2_sddot": float(integrate.trapezoid(t_in ** 2 * sddot_in, t_in))
        + lead * t1 ** 3 / (local_power + 3.0),
    }


def resolvent_tails(table: ScalarResolventTable) -> Dict[str, float]:
    t = table.t
    inner = slice(1, None)
    return {
        "s": _tail(t, table.s),
        "sdot": _tail(t, table.sdot),
        "t_sdot": _tail(t, t * table.sdot),
        "t_sddot": _tail(t[inner], t[inner] * table.sddot[inner]),
        "t2_sddot": _tail(t[inner], t[inner] ** 2 * table.sddot[inner]),
    }


@dataclass
class ScalingReport:
    """Norms per mu, fitted slopes in mu and the target slope of each norm"""

    rho: float
    mus: np.ndarray
    norms: Dict[str, np.ndarray]
    tails: Dict[str, np.ndarray]
    fits: Dict[str, LogLogFit]
    targets: Dict[str, float]
    sup_norms: np.ndarray
    final_values: np.ndarray
    tables: List[ScalarResolventTable] = field(default_factory=list, repr=False)

    @property
    def contraction(self) -> bool:
        return bool(np.all(self.sup_norms <= 1.0 + CONTRACTION_SLACK))

    def deviations(self) -> Dict[str, float]:
        return {
            name: abs(self.fits[name].slope - self.targets[name]) for name in NORM_NAMES
        }

    def passed(self, tolerance: float) -> bool:
        deviations = self.deviations().values()
        return self.contraction and all(d <= tolerance for d in deviations)

    def constants(self) -> Dict[str, float]:
        """Fitted prefactors C with norm = C mu^slope"""
        return {name: fit.constant for name, fit in self.fits.items()}

    def records(self, tolerance: float) -> List[Dict[str, object]]:
        rows: List[Dict[str, object]] = []
        for name in NORM_NAMES:
            fit = self.fits[name]
            rows.append({
                "name": f"slope[{name}]",
                "value": fit.slope,
                "target": self.targets[name],
                "threshold": tolerance,
                "pass": abs(fit.slope - self.targets[name]) <= tolerance,
            })
        rows.append({
            "name": "sup|s|",
            "value": float(self.sup_norms.max()),
            "threshold": 1.0 + CONTRACTION_SLACK,
            "pass": self.contraction,
        })
        return rows

    def to_dict(self, tolerance: Optional[float] = None) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "rho": self.rho,
            "mu": self.mus,
            "norms": self.norms,
            "tails": self.tails,
            "fits": {name: fit.to_dict() for name, fit in self.fits.items()},
            "targets": self.targets,
            "constants": self.constants(),
            "sup_norms": self.sup_norms,
            "final_values": self.final_values,
        }
        if tolerance is not None:
            payload["checks"] = self.records(tolerance)
            payload["passed"] = self.passed(tolerance)
        return payload


def slope_targets(rho: float) -> Dict[str, float]:
    return {
        "s": -1.0 / rho,
        "sdot": 0.0,
        "t_sdot": -1.0 / rho,
        "t_sddot": 0.0,
        "t2_sddot": -1.0 / rho,
    }


def verify_scalar_estimates(
    kernel: KernelSpec,
    mu_grid: Sequence[float],
    grid: TimeGrid,
    threads: Optional[int] = None,
    include_tail: bool = True,
    keep_tables: bool = False,
) -> ScalingReport:
    """Solve for every mu and fit the decay of each weighted norm in mu"""
    if kernel.rho is None:
        raise ParameterOutOfRange("kernel has no growth exponent rho")
    mus = np.sort(np.asarray(mu_grid, dtype=float))
    if mus.size < 2 or mus[0] <= 0 or mus[-1] / mus[0] < 1e3 * (1.0 - 1e-9):
        raise ParameterOutOfRange(
            "mu grid must be positive and span at least three decades"
        )

    tables = solve_scalar_parallel(kernel, mus, grid, threads=threads)
    # only the largest mu must have decayed; smaller ones rely on the tail terms
    finals = np.array([abs(table.s[-1]) for table in tables])
    if finals[-1] >= HORIZON_TAIL_LIMIT:
        raise HorizonTooShort(
            f"|s(T)| = {finals[-1]:.3g} for the largest mu={mus[-1]:.6g} "
            f"(limit {HORIZON_TAIL_LIMIT}); increase T"
        )
    for mu, final in zip(mus[:-1], finals[:-1]):
        if final >= HORIZON_TAIL_LIMIT:
            logger.warning(
                "|s(T)| = %.3g for mu=%.6g; its norms lean on the tail estimate",
                final,
                mu,
            )

    local_power = kernel.singular_exponent
    norms = {name: np.zeros(mus.size) for name in NORM_NAMES}
    tails = {name: np.zeros(mus.size) for name in NORM_NAMES}
    for m, table in enumerate(tables):
        for name, value in resolvent_norms(table, local_power).items():
            norms[name][m] = value
        for name, value in resolvent_tails(table).items():
            tails[name][m] = value

    fits = {}
    for name in NORM_NAMES:
        values = norms[name]
        if include_tail and np.all(np.isfinite(tails[name])):
            values = values + tails[name]
        fits[name] = fit_loglog(mus, values)
        logger.info(
            "norm %s: slope %.4f (target %.4f)",
            name,
            fits[name].slope,
            slope_targets(kernel.rho)[name],
        )

    return ScalingReport(
        rho=float(kernel.rho),
        mus=mus,
        norms=norms,
        tails=tails,
        fits=fits,
        targets=slope_targets(kernel.rho),
        sup_norms=np.array([table.sup_norm() for table in tables]),
        final_values=finals,
        tables=tables if keep_tables else [],
    )
