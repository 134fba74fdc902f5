"""
Pathwise Picard iteration for the mild solution
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from config.settings import (
    ALPHA_FACTOR,
    ALPHA_MAX_DOUBLINGS,
    PICARD_MAX_ITER,
    PICARD_TOL,
    RATIO_WINDOW,
)
from src.noise.convolution import causal_convolve, check_grid, convolve_increments
from src.noise.increments import NoisePath, sample_increments
from src.resolvent.grid import TimeGrid
from src.solver.problem import ProblemSpec
from src.spectral.bank import ResolventBank
from src.spectral.basis import FieldPath, hdot_norms
from src.utils.errors import GridMismatch, NoContraction
from src.utils.log import get_logger

logger = get_logger(__name__)


def initial_alpha(problem: ProblemSpec) -> float:
    """4 (C_F + C_G)^2 max(1, T), at least ALPHA_FACTOR"""
    lipschitz = max(problem.lipschitz_sum, 1.0)
    return ALPHA_FACTOR * lipschitz ** 2 * max(1.0, problem.horizon)


class PicardMap:
    """Phi(u)(t_j) = S(t_j) u0 + (S * F(u))(t_j) + sum_i S(t_j - t_i) G(u(t_i)) dW_i"""

    def __init__(
        self,
        problem: ProblemSpec,
        bank: ResolventBank,
        noise: NoisePath,
        u0: np.ndarray,
    ) -> None:
        check_grid(bank, noise.grid)
        if noise.n_modes != bank.n_modes:
            raise GridMismatch("noise path and bank have different mode counts")
        self.problem = problem
        self.bank = bank
        self.noise = noise
        self.steps = bank.grid.steps
        self.linear = bank.s * np.asarray(u0, dtype=float)[:, None]
        integrated = bank.integrated
        # int over [t_i, t_{i+1}] of s(t_j - sigma), indexed by j-1-i
        self.drift_kernel = integrated[:, 1:] - integrated[:, :-1]
        if problem.rule == "local" and noise.local is None:
            raise GridMismatch(
                "local rule needs a noise path sampled with local normals"
            )

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        problem = self.problem
        past = coeffs[:, : self.steps]
        out = self.linear.copy()
        if not problem.f_map.is_zero:
            out += causal_convolve(self.drift_kernel, problem.f_map.apply(past))
        if not problem.g_map.is_zero:
            weighted = problem.g_map.apply(past, self.noise.increments)
            weighted_local = None
            if problem.rule == "local":
                weighted_local = problem.g_map.apply(past, self.noise.local)
            out += convolve_increments(
                self.bank, weighted, problem.rule, weighted_local
            )
        return out


def weighted_distance(
    diff: np.ndarray, bank: ResolventBank, s: float, alpha: float
) -> Tuple[float, float]:
    """(sup_j e^{-alpha t_j} ||diff_j||, sup_j ||diff_j||) in H^s"""
    norms = hdot_norms(s, diff, bank.basis)
    weights = np.exp(-alpha * bank.grid.nodes)
    return float(np.max(weights * norms)), float(np.max(norms))


def geometric_ratio(distances: List[float], window: int = RATIO_WINDOW) -> float:
    """Geometric mean of the last ratios d_{n+1}/d_n with positive entries"""
    ratios = [b / a for a, b in zip(distances[:-1], distances[1:]) if a > 0 and b > 0]
    ratios = ratios[-window:]
    if not ratios:
        return 0.0
    return float(math.exp(sum(math.log(x) for x in ratios) / len(ratios)))


@dataclass
class PicardState:
    iteration: int
    coeffs: np.ndarray = field(repr=False)
    # ||u^(n) - u^(n-1)||_{H^s0} at every node
    profile: np.ndarray = field(repr=False)
    distance: float
    raw_distance: float
    alpha: float


@dataclass
class PicardCertificate:
    """Distances of one Picard run, weighted at alpha.

    The per-node profiles of the successive differences are kept, so the same
    run can be read at any other weight with at(alpha).
    """

    alpha: float
    profiles: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    tol: float
    constant: bool = False

    @property
    def iterations(self) -> int:
        return int(self.profiles.shape[0])

    @property
    def distances(self) -> List[float]:
        weights = np.exp(-self.alpha * self.nodes)
        return [float(d) for d in np.max(self.profiles * weights[None, :], axis=1)]

    @property
    def raw_distances(self) -> List[float]:
        return [float(d) for d in np.max(self.profiles, axis=1)]

    @property
    def converged(self) -> bool:
        if self.iterations == 0:
            return False
        return self.constant or self.distances[-1] < self.tol

    @property
    def ratio(self) -> float:
        return geometric_ratio(self.distances)

    def at(self, alpha: float) -> "PicardCertificate":
        """The same iterates measured with weight e^{-alpha t}"""
        return replace(self, alpha=float(alpha))

    def summary(self) -> "PicardSummary":
        """What an ensemble keeps of the run once the profiles are dropped"""
        return PicardSummary(
            self.alpha,
            self.distances,
            self.raw_distances,
            self.iterations,
            self.converged,
            self.tol,
            self.ratio,
        )

    def to_dict(self) -> Dict[str, object]:
        return self.summary().to_dict()


@dataclass(frozen=True)
class PicardSummary:
    alpha: float
    distances: List[float]
    raw_distances: List[float]
    iterations: int
    converged: bool
    tol: float
    ratio: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "distances": self.distances,
            "raw_distances": self.raw_distances,
            "ratio": self.ratio,
            "iterations": self.iterations,
            "converged": self.converged,
            "tol": self.tol,
        }


def iterate_picard(
    picard_map: PicardMap,
    alpha: float,
    initial: Optional[np.ndarray] = None,
    max_iter: int = PICARD_MAX_ITER,
) -> Iterator[PicardState]:
    """Yield u^(1), u^(2), ... with their distance to the previous iterate"""
    bank = picard_map.bank
    s0 = picard_map.problem.s0
    weights = np.exp(-alpha * bank.grid.nodes)
    if initial is None:
        current = np.zeros_like(picard_map.linear)
    else:
        current = np.asarray(initial, dtype=float)
    for n in range(1, max_iter + 1):
        following = picard_map(current)
        profile = hdot_norms(s0, following - current, bank.basis)
        distance, raw = float(np.max(weights * profile)), float(np.max(profile))
        logger.debug("picard %d: d=%.3e raw=%.3e", n, distance, raw)
        yield PicardState(n, following, profile, distance, raw, alpha)
        current = following


def picard_solve(
    problem: ProblemSpec,
    bank: ResolventBank,
    grid: TimeGrid,
    seed: int,
    path_index: int,
    alpha: Optional[float] = None,
    tol: float = PICARD_TOL,
    max_iter: int = PICARD_MAX_ITER,
    initial: Optional[np.ndarray] = None,
    noise: Optional[NoisePath] = None,
    bridge_levels: int = 0,
) -> Tuple[FieldPath, PicardCertificate]:
    """Fixed point of Phi on one frozen noise path.

    The iteration runs once; it stops when the weighted distance d_n drops
    below tol. Without an explicit alpha the weight starts at initial_alpha;
    when the run so far shows no contraction the weight doubles, up to
    2^ALPHA_MAX_DOUBLINGS times, and the stored iterates are re-measured
    before any further iteration.
    """
    check_grid(bank, grid)
    if noise is None:
        noise = sample_increments(
            problem.cov, grid, seed, path_index, bank.n_modes, bank.basis,
            with_local=problem.rule == "local", bridge_levels=bridge_levels,
        )
    u0 = problem.u0.sample(problem.basis, seed, path_index).coeffs
    picard_map = PicardMap(problem, bank, noise, u0)
    if alpha is None:
        start = initial_alpha(problem)
        alphas = [start * 2.0 ** k for k in range(ALPHA_MAX_DOUBLINGS + 1)]
    else:
        alphas = [float(alpha)]

    steps = iterate_picard(picard_map, alphas[0], initial, max_iter)
    profiles: List[np.ndarray] = []
    coeffs = picard_map.linear
    certificate = PicardCertificate(
        alphas[0],
        np.empty((0, grid.nodes.size)),
        grid.nodes,
        tol,
        problem.constant_map,
    )
    for candidate in alphas:
        certificate = certificate.at(candidate)
        while not certificate.converged and len(profiles) < max_iter:
            state = next(steps)
            profiles.append(state.profile)
            coeffs = state.coeffs
            certificate = replace(certificate, profiles=np.array(profiles))
        if certificate.converged and certificate.ratio < 1.0:
            return FieldPath(coeffs, bank.basis, grid.nodes), certificate
        logger.debug(
            "no contraction at alpha=%.4g after %d iterations", candidate, len(profiles)
        )
    raise NoContraction(certificate.alpha, certificate.distances)
