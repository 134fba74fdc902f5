"""
Log-log least-squares fits used by every scaling measurement
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy import stats

from src.utils.errors import ParameterOutOfRange


@dataclass(frozen=True)
class LogLogFit:
    """Slope of log y against log x with a 2-sigma half width"""

    slope: float
    intercept: float
    stderr: float
    n_points: int

    @property
    def half_width(self) -> float:
        return 2.0 * self.stderr

    @property
    def constant(self) -> float:
        """Fitted prefactor C in y = C x^slope"""
        return float(np.exp(self.intercept))

    def within(self, target: float, tolerance: float) -> bool:
        return abs(self.slope - target) <= tolerance

    def to_dict(self) -> Dict[str, float]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "half_width": self.half_width,
            "n_points": self.n_points,
        }


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> LogLogFit:
    """OLS fit of log y on log x; data must be positive and finite"""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape:
        raise ParameterOutOfRange("x and y must have the same shape")
    if np.any(xs <= 0) or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise ParameterOutOfRange("log-log fit needs positive finite data")
    if xs.size < 2:
        raise ParameterOutOfRange("log-log fit needs at least two points")
    if xs.size == 2:
        lx, ly = np.log(xs), np.log(ys)
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        return LogLogFit(float(slope), float(ly[0] - slope * lx[0]), 0.0, 2)
    result = stats.linregress(np.log(xs), np.log(ys))
    return LogLogFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        stderr=float(result.stderr),
        n_points=int(xs.size),
    )
