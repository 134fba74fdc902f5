"""
Regularity report: predicted against measured exponents per spatial exponent s
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config.settings import PATHWISE_MOMENT, SLOPE_TOLERANCE
from src.regularity.holder import (
    HolderEstimate,
    PathwiseQuotients,
    estimate_holder,
    kappa_value,
    pathwise_bound,
    pathwise_holder,
    predicted_exponent,
)
from src.regularity.maximal import MaxBound, max_bound
from src.solver.ensemble import EnsembleResult
from src.utils.errors import NumericalError, SpectralTruncationDominates
from src.utils.io import write_csv, write_gnuplot
from src.utils.log import get_logger

logger = get_logger(__name__)


@dataclass
class RegularityReport:
    r: float
    rho: float
    p: float
    tolerance: float
    estimates: Dict[float, HolderEstimate] = field(default_factory=dict)
    errors: Dict[float, str] = field(default_factory=dict)
    # s whose increments are dominated by the modes beyond the basis
    unresolved: Dict[float, str] = field(default_factory=dict)
    max_bounds: Dict[float, MaxBound] = field(default_factory=dict)
    pathwise: Dict[float, List[PathwiseQuotients]] = field(default_factory=dict)
    pathwise_skipped: Dict[float, List[float]] = field(default_factory=dict)

    @property
    def s_values(self) -> List[float]:
        return sorted(set(self.estimates) | set(self.errors) | set(self.unresolved))

    def kappa(self, s: float) -> float:
        return kappa_value(self.r, s, self.rho)

    def predicted(self, s: float) -> float:
        return predicted_exponent(self.kappa(s))

    def verdict(self) -> Dict[float, Optional[bool]]:
        verdicts: Dict[float, Optional[bool]] = {}
        for s in self.s_values:
            estimate = self.estimates.get(s)
            verdicts[s] = None if estimate is None else estimate.passed(self.tolerance)
        return verdicts

    @property
    def passed(self) -> bool:
        """Every resolved s passes; unresolved s are reported, not failed"""
        verdicts = self.verdict().items()
        return all(v is True for s, v in verdicts if s not in self.unresolved)

    def summary_rows(self) -> List[Dict[str, object]]:
        rows = []
        for s in self.s_values:
            estimate = self.estimates.get(s)
            rows.append({
                "s": s,
                "kappa": self.kappa(s),
                "predicted": self.predicted(s),
                "measured": None if estimate is None else estimate.slope,
                "ci": None if estimate is None else estimate.ci,
                "pass": self.verdict()[s],
                "error": self.errors.get(s) or self.unresolved.get(s),
                "unresolved": s in self.unresolved,
            })
        return rows

    def to_dict(self) -> Dict[str, object]:
        return {
            "r": self.r,
            "rho": self.rho,
            "p": self.p,
            "tolerance": self.tolerance,
            "summary": self.summary_rows(),
            "estimates": {
                str(s): e.to_dict(self.tolerance) for s, e in self.estimates.items()
            },
            "max_bounds": {str(s): m.to_dict() for s, m in self.max_bounds.items()},
            "pathwise": {
                str(s): [q.to_dict() for q in qs] for s, qs in self.pathwise.items()
            },
            "pathwise_skipped": {
                str(s): betas for s, betas in self.pathwise_skipped.items()
            },
            "passed": self.passed,
        }

    def rows(self) -> Iterator[Tuple[float, ...]]:
        for s, estimate in sorted(self.estimates.items()):
            columns = zip(estimate.h, estimate.increments, estimate.sup_increments)
            for h, d, d_sup in columns:
                yield (s, h, d, d_sup, estimate.predicted, estimate.slope)

    def to_csv(self, path: str, timestamp: bool = True) -> str:
        """One row per (s, h)"""
        header = ("s", "h", "D", "D_sup", "predicted", "slope")
        return write_csv(path, header, self.rows(), timestamp=timestamp)

    def to_gnuplot(self, path: str, timestamp: bool = True) -> str:
        items = sorted(self.estimates.items())
        blocks = [list(zip(e.h, e.increments, e.sup_increments)) for _, e in items]
        titles = [
            f"s={s:.6g} predicted={e.predicted:.6g} slope={e.slope:.6g}"
            for s, e in items
        ]
        return write_gnuplot(
            path, ("h", "D", "D_sup"), blocks, timestamp=timestamp, titles=titles
        )


def build_regularity_report(
    ensemble: EnsembleResult,
    s_values: Sequence[float],
    p: Optional[float] = None,
    tolerance: float = SLOPE_TOLERANCE,
    refined_modes: Sequence[EnsembleResult] = (),
    refined_steps: Sequence[EnsembleResult] = (),
    beta_grid: Sequence[float] = (),
    pathwise_p: float = PATHWISE_MOMENT,
) -> RegularityReport:
    """Hoelder fits, maximal bounds and pathwise quotients for every s.

    A failed fit is recorded against its s instead of aborting the report.
    Pathwise quotients use only the betas below the bound at s for moment
    order pathwise_p; the rest are listed as skipped.
    """
    problem = ensemble.problem
    p = p or problem.p
    report = RegularityReport(r=problem.r, rho=problem.rho, p=p, tolerance=tolerance)
    for s in s_values:
        try:
            report.estimates[s] = estimate_holder(ensemble, s, p, strict=False)
        except SpectralTruncationDominates as exc:
            logger.warning("s=%s unresolved at this mode count: %s", s, exc)
            report.unresolved[s] = str(exc)
        except NumericalError as exc:
            logger.warning("holder fit for s=%s failed: %s", s, exc)
            report.errors[s] = str(exc)
            continue
        report.max_bounds[s] = max_bound(ensemble, s, p, refined_modes, refined_steps)
        if not beta_grid:
            continue
        bound = pathwise_bound(problem.r, s, problem.rho, pathwise_p)
        admissible = [beta for beta in beta_grid if beta < bound]
        skipped = [float(beta) for beta in beta_grid if beta >= bound]
        if skipped:
            logger.info(
                "s=%s: beta %s not below the pathwise bound %.4g", s, skipped, bound
            )
            report.pathwise_skipped[s] = skipped
        if admissible:
            try:
                report.pathwise[s] = pathwise_holder(
                    ensemble, s, admissible, p=pathwise_p
                )
            except NumericalError as exc:
                logger.warning("pathwise quotients for s=%s skipped: %s", s, exc)
    return report
