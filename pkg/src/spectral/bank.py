"""
Resolvent family S(t) of the Dirichlet Laplacian, one scalar resolvent per mode
"""

import threading
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from config.settings import INTEGRATED_BOUND_FACTOR, LOCAL_SUBGRID_STEPS
from src.kernel.kernels import KernelSpec
from src.resolvent.grid import TimeGrid
from src.resolvent.scalar import (
    ScalarResolventTable,
    solve_scalar_batch,
    solve_scalar_parallel,
)
from src.spectral.basis import SpectralBasis, SpectralField
from src.utils.errors import ParameterOutOfRange
from src.utils.log import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ResolventBank:
    """s_k, s_k' and s_k'' for mu = lambda_k; arrays are (modes, nodes)"""

    basis: SpectralBasis
    kernel: KernelSpec
    grid: TimeGrid
    s: np.ndarray = field(repr=False)
    sdot: np.ndarray = field(repr=False)
    sddot: np.ndarray = field(repr=False)
    stiff_modes: Tuple[int, ...] = ()
    _cache: Dict[str, object] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        for name in ("s", "sdot", "sddot"):
            values = np.array(getattr(self, name), dtype=float)
            if values.shape != (self.basis.n_modes, self.grid.steps + 1):
                raise ParameterOutOfRange(f"{name} has shape {values.shape}")
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.basis.eigenvalues

    def index(self, t: float) -> int:
        return self.grid.index_of(t)

    def table(self, k: int) -> ScalarResolventTable:
        """Scalar table of mode k (1-based)"""
        if not 1 <= k <= self.n_modes:
            raise ParameterOutOfRange(f"mode {k} outside 1..{self.n_modes}")
        i = k - 1
        return ScalarResolventTable(
            mu=float(self.eigenvalues[i]),
            grid=self.grid,
            s=self.s[i],
            sdot=self.sdot[i],
            sddot=self.sddot[i],
        )

    @property
    def integrated(self) -> np.ndarray:
        """int_0^t s_k by the trapezoidal rule, (modes, nodes)"""
        with self._lock:
            if "integrated" not in self._cache:
                values = integrate.cumulative_trapezoid(
                    self.s, self.grid.nodes, axis=1, initial=0.0
                )
                values.setflags(write=False)
                self._cache["integrated"] = values
            return self._cache["integrated"]  # type: ignore[return-value]

    def local_moments(
        self, steps: int = LOCAL_SUBGRID_STEPS
    ) -> Tuple[np.ndarray, np.ndarray]:
        """(a_k, b_k), a_k = int_0^dt s_k / dt and b_k^2 = int_0^dt s_k^2 - a_k^2 dt.

        The integrals come from a separate solve on a fine grid over [0, dt].
        """
        key = f"local_moments:{steps}"
        with self._lock:
            if key not in self._cache:
                dt = self.grid.dt
                sub = TimeGrid.uniform(dt, steps)
                tables = solve_scalar_batch(self.kernel, self.eigenvalues, sub)
                s_sub = np.vstack([table.s for table in tables])
                mean = integrate.trapezoid(s_sub, sub.nodes, axis=1) / dt
                square = integrate.trapezoid(s_sub ** 2, sub.nodes, axis=1)
                spread = np.sqrt(np.maximum(square - mean ** 2 * dt, 0.0))
                self._cache[key] = (mean, spread)
            return self._cache[key]  # type: ignore[return-value]

    def energy(self) -> np.ndarray:
        """int_0^T s_k^2 for every mode.

        On a uniform grid the first step comes from local_moments, so modes that
        decay within one step are still resolved.
        """
        with self._lock:
            cached = self._cache.get("energy")
        if cached is not None:
            return cached  # type: ignore[return-value]
        squares = self.s ** 2
        if self.grid.is_uniform:
            mean, spread = self.local_moments()
            first = spread ** 2 + mean ** 2 * self.grid.dt
            rest = integrate.trapezoid(squares[:, 1:], self.grid.nodes[1:], axis=1)
            values = first + rest
        else:
            values = integrate.trapezoid(squares, self.grid.nodes, axis=1)
        with self._lock:
            self._cache["energy"] = values
        return values


def build_resolvent_bank(
    kernel: KernelSpec,
    basis: SpectralBasis,
    grid: TimeGrid,
    threads: Optional[int] = None,
    strict: bool = False,
) -> ResolventBank:
    """Solve the scalar resolvent for every eigenvalue of the basis"""
    logger.info(
        "building resolvent bank: %d modes, %d steps (%s grid)",
        basis.n_modes,
        grid.steps,
        grid.kind,
    )
    tables = solve_scalar_parallel(
        kernel, basis.eigenvalues, grid, threads=threads, strict=strict
    )
    stiff = tuple(k + 1 for k, table in enumerate(tables) if table.stiff_intervals)
    if stiff:
        logger.info("%d stiff mode(s), first is k=%d", len(stiff), stiff[0])
    return ResolventBank(
        basis=basis,
        kernel=kernel,
        grid=grid,
        s=np.vstack([table.s for table in tables]),
        sdot=np.vstack([table.sdot for table in tables]),
        sddot=np.vstack([table.sddot for table in tables]),
        stiff_modes=stiff,
    )


def apply_S(bank: ResolventBank, t: float, f: SpectralField) -> SpectralField:
    """S(t) f at a grid node"""
    return f.scale(bank.s[:, bank.index(t)])


def apply_Sdot(bank: ResolventBank, t: float, f: SpectralField) -> SpectralField:
    """S'(t) f at a grid node"""
    return f.scale(bank.sdot[:, bank.index(t)])


def integrated_resolvent(
    bank: ResolventBank, f: SpectralField, t: float
) -> SpectralField:
    """int_0^t S(sigma) f d sigma"""
    return f.scale(bank.integrated[:, bank.index(t)])


@dataclass
class IntegratedBound:
    """sup_t lambda_k^{1/rho} |int_0^t s_k| per mode"""

    values: np.ndarray
    factor: float

    @property
    def spread(self) -> float:
        return float(self.values.max() / self.values.min())

    @property
    def passed(self) -> bool:
        return self.spread <= self.factor

    def to_dict(self) -> Dict[str, object]:
        return {
            "values": self.values,
            "spread": self.spread,
            "threshold": self.factor,
            "pass": self.passed,
        }


def integrated_bound(
    bank: ResolventBank,
    rho: Optional[float] = None,
    factor: float = INTEGRATED_BOUND_FACTOR,
) -> IntegratedBound:
    rho = rho if rho is not None else bank.kernel.rho
    if rho is None:
        raise ParameterOutOfRange("integrated bound needs rho")
    weighted = bank.eigenvalues[:, None] ** (1.0 / rho) * np.abs(bank.integrated)
    return IntegratedBound(values=weighted.max(axis=1), factor=factor)
