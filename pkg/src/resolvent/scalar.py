"""
Scalar resolvent s_mu: s' + mu (b * s) = 0, s(0) = 1

The integrated form s(t) = 1 - mu (B * s)(t) is discretized by product
integration against piecewise-linear s. Weights are exact moments of the
kernel primitives, so the t^{rho-2} singularity of b is never sampled.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import interpolate

from src.kernel.kernels import KernelSpec
from src.resolvent.grid import TimeGrid
from src.utils.errors import GridTooCoarse, KernelMomentFailure, ParameterOutOfRange
from src.utils.io import write_csv
from src.utils.log import get_logger
from src.utils.parallel import chunked, map_ordered, resolve_threads

try:
    from config.settings import STIFFNESS_THRESHOLD
except ImportError:
    STIFFNESS_THRESHOLD = 1.0

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ScalarResolventTable:
    """s, s' and s'' of one mode on a grid; s''[0] is undefined (nan)"""

    mu: float
    grid: TimeGrid
    s: np.ndarray = field(repr=False)
    sdot: np.ndarray = field(repr=False)
    sddot: np.ndarray = field(repr=False)
    stiff_intervals: int = 0

    def __post_init__(self) -> None:
        for name in ("s", "sdot", "sddot"):
            values = np.array(getattr(self, name), dtype=float)
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.s)))

    def rows(self) -> Iterator[Tuple[float, float, float, float]]:
        for j in range(self.t.size):
            yield (self.t[j], self.s[j], self.sdot[j], self.sddot[j])

    def to_csv(self, path: str, timestamp: bool = True) -> str:
        """Columns t, s, sdot, sddot"""
        header = ("t", "s", "sdot", "sddot")
        return write_csv(path, header, self.rows(), timestamp=timestamp)


class _Primitives:
    """B_1, B_2, B_3 of the kernel at t_j - t_i, cached on uniform grids"""

    def __init__(self, kernel: KernelSpec, grid: TimeGrid) -> None:
        self.kernel = kernel
        self.grid = grid
        self._table: Optional[np.ndarray] = None
        if grid.is_uniform:
            lags = grid.dt * np.arange(grid.steps + 1)
            self._table = np.vstack([self._eval(lags, m) for m in (1, 2, 3)])

    def _eval(self, d: np.ndarray, order: int) -> np.ndarray:
        try:
            return np.asarray(self.kernel.primitive(d, order), dtype=float)
        except KernelMomentFailure:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise KernelMomentFailure(
                f"primitive of order {order} failed: {exc}"
            ) from exc

    def row(self, j: int) -> np.ndarray:
        """(3, j+1) array; column i holds B_m(t_j - t_i)"""
        if self._table is not None:
            return self._table[:, j::-1]
        d = self.grid.nodes[j] - self.grid.nodes[: j + 1]
        d[-1] = 0.0
        return np.vstack([self._eval(d, m) for m in (1, 2, 3)])


def _hat_weights(
    p_lo: np.ndarray, p_hi: np.ndarray, h: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments of a kernel K against the two hat functions of each interval.

    p_lo and p_hi are the primitive of K and the primitive of that, evaluated
    at c = t_j - t_i; returns (left, right, full) where full = left + right.
    """
    k1, k2 = p_lo, p_hi
    full = k1[:-1] - k1[1:]
    left = (k1[:-1] * h - (k2[:-1] - k2[1:])) / h
    return left, full - left, full


def _assemble(
    left: np.ndarray,
    right: np.ndarray,
    full: np.ndarray,
    stiff: Optional[np.ndarray],
) -> np.ndarray:
    """Node weights from interval weights; stiff intervals load only the right node"""
    j = left.shape[-1]
    shape = left.shape[:-1] + (j + 1,)
    if stiff is None:
        w = np.zeros(shape)
        w[..., :j] += left
        w[..., 1:] += right
        return w
    w = np.zeros(stiff.shape[:-1] + (j + 1,))
    w[..., :j] += np.where(stiff, 0.0, left)
    w[..., 1:] += np.where(stiff, full, right)
    return w


def stiffness_index(kernel: KernelSpec, mus: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """mu ||b||_{L1(0,h_i)} h_i per (mode, interval)"""
    h = grid.widths
    if grid.is_uniform:
        per_interval = np.full(h.shape, float(kernel.l1_norm(grid.dt)) * grid.dt)
    else:
        per_interval = np.asarray(kernel.l1_norm(h), dtype=float) * h
    return np.outer(np.asarray(mus, dtype=float), per_interval)


def solve_scalar_batch(
    kernel: KernelSpec,
    mus: Sequence[float],
    grid: TimeGrid,
    strict: bool = False,
    threshold: float = STIFFNESS_THRESHOLD,
) -> List[ScalarResolventTable]:
    """One table per mu; all modes share the kernel moments of each row"""
    mus = np.asarray(mus, dtype=float)
    if mus.ndim != 1:
        raise ParameterOutOfRange("mus must be one-dimensional")
    if np.any(mus < 0) or not np.all(np.isfinite(mus)):
        raise ParameterOutOfRange("mu must be finite and non-negative")
    n_modes, n = mus.size, grid.steps
    stiff = stiffness_index(kernel, mus, grid) > threshold
    stiff_count = stiff.sum(axis=1)
    if stiff_count.any():
        first = int(np.argmax(stiff_count > 0))
        if strict:
            raise GridTooCoarse(
                f"mu={mus[first]:.6g}: stiffness index exceeds {threshold} "
                f"on {int(stiff_count[first])} interval(s)",
                mode_index=first,
            )
        logger.warning(
            "%d of %d mode(s) use the stable rule on stiff intervals",
            int((stiff_count > 0).sum()),
            n_modes,
        )

    linear = np.flatnonzero(stiff_count == 0)
    constant = np.flatnonzero(stiff_count == n)
    mixed = np.flatnonzero((stiff_count > 0) & (stiff_count < n))

    s = np.zeros((n_modes, n + 1))
    sdot = np.zeros((n_modes, n + 1))
    sddot = np.full((n_modes, n + 1), np.nan)
    s[:, 0] = 1.0

    primitives = _Primitives(kernel, grid)
    h_all = grid.widths
    nodes = grid.nodes
    b_values = np.zeros(n + 1)
    # regular_part extends tabulated kernels below their first node
    inner = nodes[1:]
    b_values[1:] = kernel.regular_part(inner) * inner ** kernel.singular_exponent

    for j in range(1, n + 1):
        p1, p2, p3 = primitives.row(j)
        h = h_all[:j]
        lw, rw, fw = _hat_weights(p2, p3, h)  # against B
        lb, rb, fb = _hat_weights(p1, p2, h)  # against b
        for group, mode_stiff in ((linear, None), (constant, True), (mixed, False)):
            if group.size == 0:
                continue
            mu = mus[group]
            if mode_stiff is None:
                w = _assemble(lw, rw, fw, None)
                wb = _assemble(lb, rb, fb, None)
            elif mode_stiff:
                w = np.concatenate(([0.0], fw))
                wb = np.concatenate(([0.0], fb))
            else:
                mask = stiff[group, :j]
                w = _assemble(lw, rw, fw, mask)
                wb = _assemble(lb, rb, fb, mask)
            if w.ndim == 1:
                history = s[group, :j] @ w[:j]
                s[group, j] = (1.0 - mu * history) / (1.0 + mu * w[j])
                sdot[group, j] = -mu * (s[group, : j + 1] @ wb)
                sddot[group, j] = -mu * (b_values[j] + sdot[group, : j + 1] @ wb)
            else:
                history = np.einsum("mi,mi->m", s[group, :j], w[:, :j])
                s[group, j] = (1.0 - mu * history) / (1.0 + mu * w[:, j])
                sdot[group, j] = -mu * np.einsum("mi,mi->m", s[group, : j + 1], wb)
                memory = np.einsum("mi,mi->m", sdot[group, : j + 1], wb)
                sddot[group, j] = -mu * (b_values[j] + memory)

    return [
        ScalarResolventTable(
            mu=float(mus[m]),
            grid=grid,
            s=s[m],
            sdot=sdot[m],
            sddot=sddot[m],
            stiff_intervals=int(stiff_count[m]),
        )
        for m in range(n_modes)
    ]


def solve_scalar(
    kernel: KernelSpec, mu: float, grid: TimeGrid, strict: bool = False
) -> ScalarResolventTable:
    """Scalar resolvent for a single mu"""
    return solve_scalar_batch(kernel, [mu], grid, strict=strict)[0]


def convolution_residual(
    kernel: KernelSpec, table: ScalarResolventTable, refine: int = 4
) -> float:
    """max_j |s'(t_j) + mu (b * s)(t_j)| with an independent convolution.

    s is carried to a grid `refine` times finer by monotone cubic
    interpolation, and the convolution uses that grid's b-moments.
    """
    grid = table.grid
    if grid.is_uniform:
        fine = TimeGrid.uniform(grid.horizon, grid.steps * refine)
    else:
        positions = np.arange(grid.steps * refine + 1) / refine
        fine_nodes = np.interp(positions, np.arange(grid.steps + 1), grid.nodes)
        fine = TimeGrid(horizon=grid.horizon, nodes=fine_nodes, kind="refined")
    s_fine = interpolate.PchipInterpolator(grid.nodes, table.s)(fine.nodes)
    primitives = _Primitives(kernel, fine)
    worst = 0.0
    for j in range(1, grid.steps + 1):
        jf = j * refine
        p1, p2, _ = primitives.row(jf)
        lb, rb, fb = _hat_weights(p1, p2, fine.widths[:jf])
        wb = _assemble(lb, rb, fb, None)
        worst = max(worst, abs(table.sdot[j] + table.mu * float(s_fine[: jf + 1] @ wb)))
    return worst


def solve_scalar_parallel(
    kernel: KernelSpec,
    mus: Sequence[float],
    grid: TimeGrid,
    threads: Optional[int] = None,
    strict: bool = False,
) -> List[ScalarResolventTable]:
    """solve_scalar_batch split into contiguous chunks of modes on a thread pool"""
    mus = [float(mu) for mu in mus]
    if strict:
        index = stiffness_index(kernel, np.asarray(mus), grid)
        stiff = (index > STIFFNESS_THRESHOLD).any(axis=1)
        if stiff.any():
            first = int(np.argmax(stiff))
            raise GridTooCoarse(
                f"mu={mus[first]:.6g}: stiffness index exceeds {STIFFNESS_THRESHOLD}",
                mode_index=first,
            )
    chunks = chunked(len(mus), resolve_threads(threads))

    def solve_chunk(indices: Sequence[int]) -> List[ScalarResolventTable]:
        return solve_scalar_batch(kernel, [mus[i] for i in indices], grid)

    parts = map_ordered(solve_chunk, chunks, threads)
    return [table for part in parts for table in part]
