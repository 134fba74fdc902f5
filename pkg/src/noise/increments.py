"""
Counter-based Gaussian increments of the Q-Wiener process
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.noise.covariance import CovarianceSpec
from src.resolvent.grid import TimeGrid
from src.spectral.basis import SpectralBasis
from src.utils.errors import ParameterOutOfRange

# Philox counter word that separates independent uses of one (seed, path, mode)
STREAM_INCREMENTS = 0
STREAM_LOCAL = 1
STREAM_INITIAL = 2
# bridge levels use STREAM_BRIDGE, STREAM_BRIDGE + 1, ...
STREAM_BRIDGE = 3


def mode_generator(
    seed: int, path_index: int, mode: int, stream: int = STREAM_INCREMENTS
) -> np.random.Generator:
    """Generator whose draws depend only on (seed, path, mode, stream)"""
    if seed < 0 or path_index < 0 or mode < 0:
        raise ParameterOutOfRange("seed, path index and mode must be non-negative")
    key = np.array([seed, path_index], dtype=np.uint64)
    counter = np.array([0, mode, stream, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def standard_normals(
    seed: int,
    path_index: int,
    n_modes: int,
    n_draws: int,
    stream: int = STREAM_INCREMENTS,
) -> np.ndarray:
    """(n_modes, n_draws) standard normals; row k is mode k's stream"""
    out = np.empty((n_modes, n_draws))
    for mode in range(n_modes):
        generator = mode_generator(seed, path_index, mode, stream)
        out[mode] = generator.standard_normal(n_draws)
    return out


@dataclass(frozen=True, eq=False)
class NoisePath:
    """Increments dW[k, i] over [t_i, t_{i+1}] with variance q_k dt_i"""

    seed: int
    path_index: int
    grid: TimeGrid
    cov: CovarianceSpec
    increments: np.ndarray = field(repr=False)
    # sqrt(q_k) xi[k, i]: normals independent of the increments
    local: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return self.increments.shape[0]

    def perturbed(self, step: int, delta: float) -> "NoisePath":
        """Copy with every mode's increment at one step shifted by delta"""
        increments = np.array(self.increments)
        increments[:, step] += delta
        return NoisePath(
            self.seed, self.path_index, self.grid, self.cov, increments, self.local
        )


def bridge_split(
    increments: np.ndarray,
    coarse: TimeGrid,
    fine: TimeGrid,
    q: np.ndarray,
    normals: np.ndarray,
) -> np.ndarray:
    """Split each coarse increment into two with the Brownian bridge law.

    The halves sum to the coarse increment, are uncorrelated and have
    variances q_k times their step widths.
    """
    if fine.steps != 2 * coarse.steps or not np.allclose(fine.nodes[::2], coarse.nodes):
        raise ParameterOutOfRange("fine grid must halve every step of the coarse grid")
    widths = coarse.widths
    theta = fine.widths[::2] / widths
    spread = np.sqrt(q[:, None] * widths * theta * (1.0 - theta)) * normals
    out = np.empty((increments.shape[0], fine.steps))
    out[:, ::2] = theta * increments + spread
    out[:, 1::2] = (1.0 - theta) * increments - spread
    return out


def sample_increments(
    cov: CovarianceSpec,
    grid: TimeGrid,
    seed: int,
    path_index: int,
    n_modes: int,
    basis: Optional[SpectralBasis] = None,
    with_local: bool = False,
    bridge_levels: int = 0,
) -> NoisePath:
    """Draw the increments of one path; deterministic in (seed, path_index).

    With bridge_levels = m the increments are drawn on the grid coarsened m
    times and split down to this grid, so a path refined in time keeps the
    Brownian motion of the coarse path at the coarse nodes.
    """
    basis = basis or SpectralBasis(n_modes)
    if n_modes > basis.n_modes:
        raise ParameterOutOfRange(
            f"{n_modes} modes requested from a basis of {basis.n_modes}"
        )
    q = cov.eigenvalues(basis)[:n_modes]
    scale = np.sqrt(q)[:, None]
    coarse = grid.coarsened(bridge_levels)
    z = standard_normals(seed, path_index, n_modes, coarse.steps, STREAM_INCREMENTS)
    increments = scale * np.sqrt(coarse.widths)[None, :] * z
    for level in range(bridge_levels, 0, -1):
        fine = grid.coarsened(level - 1)
        stream = STREAM_BRIDGE + level - 1
        normals = standard_normals(seed, path_index, n_modes, coarse.steps, stream)
        increments = bridge_split(increments, coarse, fine, q, normals)
        coarse = fine
    local = None
    if with_local:
        draws = standard_normals(seed, path_index, n_modes, grid.steps, STREAM_LOCAL)
        local = scale * draws
    return NoisePath(seed, path_index, grid, cov, increments, local)
