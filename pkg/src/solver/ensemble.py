"""
Monte Carlo ensembles of pathwise solutions, reduced online per path
"""

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import HOLDER_BASE_FRACTIONS, LAG_K_MAX, LAG_K_MIN, PICARD_TOL
from src.resolvent.grid import TimeGrid
from src.solver.picard import PicardSummary, picard_solve
from src.solver.problem import ProblemSpec
from src.spectral.bank import ResolventBank, build_resolvent_bank
from src.spectral.basis import FieldPath, hdot_norms
from src.utils.errors import (
    EnsembleFailure,
    LagOutOfRange,
    ParameterOutOfRange,
    VolterraLabError,
)
from src.utils.io import write_csv
from src.utils.log import get_logger
from src.utils.parallel import map_ordered

logger = get_logger(__name__)


def dyadic_lags(
    grid: TimeGrid, k_min: int = LAG_K_MIN, k_max: int = LAG_K_MAX
) -> Tuple[int, ...]:
    """Lags h = T 2^-k in steps, for k_min <= k <= min(k_max, log2(T / (4 dt)))"""
    top = min(k_max, int(math.floor(math.log2(grid.steps / 4.0) + 1e-9)))
    lags = []
    for k in range(k_min, top + 1):
        steps = grid.steps / 2.0 ** k
        if steps != int(steps):
            raise LagOutOfRange(
                f"h = T 2^-{k} is not a multiple of the step (N = {grid.steps})"
            )
        lags.append(int(steps))
    return tuple(lags)


def base_nodes(
    grid: TimeGrid, fractions: Sequence[float] = HOLDER_BASE_FRACTIONS
) -> Tuple[int, ...]:
    return tuple(int(round(f * grid.steps)) for f in fractions)


@dataclass(frozen=True)
class MeasurementPlan:
    """What each path is reduced to: H^s norm paths and increments at lags (in steps)"""

    s_values: Tuple[float, ...]
    lags: Tuple[int, ...]
    base_points: Tuple[int, ...]
    keep_paths: bool = False

    @classmethod
    def default(
        cls, grid: TimeGrid, s_values: Sequence[float], keep_paths: bool = False
    ) -> "MeasurementPlan":
        s_tuple = tuple(float(s) for s in s_values)
        return cls(s_tuple, dyadic_lags(grid), base_nodes(grid), keep_paths)

    def validate(self, grid: TimeGrid) -> None:
        n = grid.steps
        for lag in self.lags:
            if lag < 4 or lag * 4 >= n:
                raise LagOutOfRange(
                    f"lag of {lag} steps outside [4 dt, T/4) for N = {n}"
                )
        for base in self.base_points:
            if base < 0 or base + max(self.lags, default=0) > n:
                raise LagOutOfRange(
                    f"base node {base} plus the largest lag leaves the grid"
                )


@dataclass
class PathReduction:
    norms: np.ndarray  # (n_s, nodes)
    increments: np.ndarray  # (n_s, n_lags, n_base)
    sup_increments: np.ndarray  # (n_s, n_lags)
    certificate: PicardSummary
    path: Optional[FieldPath] = None


def reduce_path(
    path: FieldPath, plan: MeasurementPlan
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    coeffs = path.coeffs
    basis = path.basis
    n_s, n_lags, n_base = len(plan.s_values), len(plan.lags), len(plan.base_points)
    norms = np.empty((n_s, path.n_nodes))
    increments = np.empty((n_s, n_lags, n_base))
    sup_increments = np.empty((n_s, n_lags))
    for a, s in enumerate(plan.s_values):
        norms[a] = hdot_norms(s, coeffs, basis)
        for b, lag in enumerate(plan.lags):
            diffs = hdot_norms(s, coeffs[:, lag:] - coeffs[:, :-lag], basis)
            sup_increments[a, b] = diffs.max()
            increments[a, b] = diffs[list(plan.base_points)]
    return norms, increments, sup_increments


@dataclass
class EnsembleResult:
    """Per-path reductions of an ensemble; arrays lead with the path axis"""

    problem: ProblemSpec
    grid: TimeGrid
    plan: MeasurementPlan
    seed: int
    norms: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)
    sup_increments: np.ndarray = field(repr=False)
    certificates: List[PicardSummary] = field(default_factory=list, repr=False)
    paths: List[FieldPath] = field(default_factory=list, repr=False)
    bank: Optional[ResolventBank] = field(default=None, repr=False)

    @property
    def n_paths(self) -> int:
        return self.norms.shape[0]

    def s_index(self, s: float) -> int:
        for i, value in enumerate(self.plan.s_values):
            if abs(value - s) <= 1e-12:
                return i
        raise ParameterOutOfRange(
            f"s={s} was not measured; plan has {self.plan.s_values}"
        )

    def lp_norm(
        self, s: float, p: Optional[float] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """(E ||u(t)||^p)^{1/p} at every node, with a delta-method standard error"""
        p = p or self.problem.p
        powered = self.norms[:, self.s_index(s), :] ** p
        mean = powered.mean(axis=0)
        if self.n_paths > 1:
            spread = powered.std(axis=0, ddof=1) / math.sqrt(self.n_paths)
        else:
            spread = np.zeros_like(mean)
        value = mean ** (1.0 / p)
        with np.errstate(divide="ignore", invalid="ignore"):
            stderr = np.where(mean > 0, value / (p * mean) * spread, 0.0)
        return value, stderr

    def rows(
        self, p: Optional[float] = None
    ) -> Iterator[Tuple[float, float, float, int, float]]:
        for s in self.plan.s_values:
            value, stderr = self.lp_norm(s, p)
            for j, t in enumerate(self.grid.nodes):
                yield (t, s, value[j], self.n_paths, stderr[j])

    def to_csv(
        self, path: str, p: Optional[float] = None, timestamp: bool = True
    ) -> str:
        header = ("t", "s_exponent", "empirical_Lp_norm", "n_paths", "stderr")
        return write_csv(path, header, self.rows(p), timestamp=timestamp)

    def summary(self) -> Dict[str, object]:
        ratios = [c.ratio for c in self.certificates]
        return {
            "n_paths": self.n_paths,
            "seed": self.seed,
            "s_values": list(self.plan.s_values),
            "lags": list(self.plan.lags),
            "base_points": list(self.plan.base_points),
            "max_iterations": max((c.iterations for c in self.certificates), default=0),
            "max_alpha": max((c.alpha for c in self.certificates), default=0.0),
            "max_ratio": max(ratios, default=0.0),
        }


def ensemble_solve(
    problem: ProblemSpec,
    grid: TimeGrid,
    seed: int,
    n_paths: int,
    alpha: Optional[float] = None,
    tol: float = PICARD_TOL,
    plan: Optional[MeasurementPlan] = None,
    threads: Optional[int] = None,
    bank: Optional[ResolventBank] = None,
    bridge_levels: int = 0,
) -> EnsembleResult:
    """picard_solve for path indices 0..n_paths-1; every path is reduced by the plan.

    bridge_levels > 0 draws each path on a coarser grid and splits it down to
    this one, so ensembles on grids N and 2N share their Brownian paths.
    """
    if n_paths < 1:
        raise ParameterOutOfRange("ensemble needs at least one path")
    plan = plan or MeasurementPlan.default(grid, (problem.s0,))
    plan.validate(grid)
    if bank is None:
        bank = build_resolvent_bank(
            problem.kernel, problem.basis, grid, threads=threads
        )
    elif not bank.grid.same_as(grid):
        raise ParameterOutOfRange("bank was built on a different grid")
    if problem.rule == "local":
        bank.local_moments()

    def run(index: int) -> Tuple[int, Union[PathReduction, str]]:
        try:
            path, certificate = picard_solve(
                problem,
                bank,
                grid,
                seed,
                index,
                alpha=alpha,
                tol=tol,
                bridge_levels=bridge_levels,
            )
        except VolterraLabError as exc:
            logger.warning("path %d failed: %s", index, exc)
            return index, str(exc)
        norms, increments, sup_increments = reduce_path(path, plan)
        summary = certificate.summary()
        kept = path if plan.keep_paths else None
        return index, PathReduction(norms, increments, sup_increments, summary, kept)

    started = time.perf_counter()
    results = map_ordered(run, list(range(n_paths)), threads)
    failures = {
        index: outcome for index, outcome in results if isinstance(outcome, str)
    }
    if failures:
        raise EnsembleFailure(failures)
    reductions = [outcome for _, outcome in results]
    elapsed = time.perf_counter() - started
    logger.info("ensemble of %d paths done in %.1f s", n_paths, elapsed)
    return EnsembleResult(
        problem=problem,
        grid=grid,
        plan=plan,
        seed=seed,
        norms=np.stack([r.norms for r in reductions]),
        increments=np.stack([r.increments for r in reductions]),
        sup_increments=np.stack([r.sup_increments for r in reductions]),
        certificates=[r.certificate for r in reductions],
        paths=[r.path for r in reductions if r.path is not None],
        bank=bank,
    )
