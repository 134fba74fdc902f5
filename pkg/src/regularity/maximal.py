"""
Maximal-in-time moments and their stability under refinement
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import DIVERGENCE_GROWTH, STABILITY_TOL
from src.solver.ensemble import EnsembleResult


@dataclass
class RefinementCheck:
    """Relative changes of a quantity along a refinement sequence"""

    values: List[float]
    tolerance: float = STABILITY_TOL
    divergence: float = DIVERGENCE_GROWTH

    @property
    def changes(self) -> List[float]:
        return [abs(b - a) / abs(a) for a, b in zip(self.values[:-1], self.values[1:])]

    @property
    def growth(self) -> List[float]:
        return [b / a - 1.0 for a, b in zip(self.values[:-1], self.values[1:])]

    @property
    def stable(self) -> bool:
        return all(c < self.tolerance for c in self.changes)

    @property
    def diverging(self) -> bool:
        return any(g >= self.divergence for g in self.growth)

    def to_dict(self) -> Dict[str, object]:
        return {
            "values": self.values,
            "changes": self.changes,
            "stable": self.stable,
            "diverging": self.diverging,
        }


def refinement_stability(
    values: Sequence[float],
    tolerance: float = STABILITY_TOL,
    divergence: float = DIVERGENCE_GROWTH,
) -> RefinementCheck:
    return RefinementCheck([float(v) for v in values], tolerance, divergence)


def sup_moment(ensemble: EnsembleResult, s: float, p: Optional[float] = None) -> float:
    """Mean over paths of sup_t ||u(t)||^p in H^s"""
    p = p or ensemble.problem.p
    norms = ensemble.norms[:, ensemble.s_index(s), :]
    return float(np.mean(norms.max(axis=1) ** p))


@dataclass
class MaxBound:
    """E sup_t ||u(t)||^p with its checks under N -> 2N and N_t -> 2N_t"""

    s: float
    p: float
    value: float
    checks: Dict[str, RefinementCheck] = field(default_factory=dict)

    @property
    def stable(self) -> Optional[bool]:
        """None without refinements; otherwise every refinement must be stable"""
        if not self.checks:
            return None
        return all(check.stable for check in self.checks.values())

    @property
    def complete(self) -> bool:
        return set(self.checks) == {"modes", "steps"}

    @property
    def diverging(self) -> bool:
        return any(check.diverging for check in self.checks.values())

    def to_dict(self) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "s": self.s,
            "p": self.p,
            "value": self.value,
            "stable": self.stable,
            "complete": self.complete,
        }
        for name, check in self.checks.items():
            payload[f"refinement_{name}"] = check.to_dict()
        return payload


def max_bound(
    ensemble: EnsembleResult,
    s: float,
    p: Optional[float] = None,
    refined_modes: Sequence[EnsembleResult] = (),
    refined_steps: Sequence[EnsembleResult] = (),
) -> MaxBound:
    """E sup_t ||u(t)||^p; doubled-mode or doubled-step ensembles give stability"""
    p = p or ensemble.problem.p
    value = sup_moment(ensemble, s, p)
    checks: Dict[str, RefinementCheck] = {}
    for name, refined in (("modes", refined_modes), ("steps", refined_steps)):
        if refined:
            values = [value] + [sup_moment(e, s, p) for e in refined]
            checks[name] = refinement_stability(values)
    return MaxBound(float(s), float(p), value, checks)
