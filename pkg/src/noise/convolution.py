"""
Stochastic convolution W_S(t) = int_0^t S(t - sigma) G dW(sigma)
"""

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy import signal

from config.settings import DEFAULT_RULE
from src.noise.covariance import CovarianceSpec
from src.noise.increments import NoisePath, sample_increments
from src.resolvent.grid import TimeGrid
from src.spectral.bank import ResolventBank
from src.spectral.basis import FieldPath
from src.utils.errors import GridMismatch, ParameterOutOfRange

RULES = ("left", "midpoint", "local")


def check_grid(bank: ResolventBank, grid: TimeGrid) -> None:
    """Noise-driven sums need the bank's own uniform grid (lags are grid nodes)"""
    if not grid.is_uniform:
        raise GridMismatch("stochastic convolution needs a uniform grid")
    if not grid.same_as(bank.grid):
        raise GridMismatch("noise grid differs from the resolvent bank grid")


def causal_convolve(kernel: np.ndarray, forcing: np.ndarray) -> np.ndarray:
    """out[:, j] = sum_{i<j} kernel[:, j-1-i] forcing[:, i]; out[:, 0] = 0"""
    n_modes, n_steps = forcing.shape
    out = np.zeros((n_modes, n_steps + 1))
    conv = signal.fftconvolve(kernel[:, :n_steps], forcing, mode="full", axes=1)
    out[:, 1:] = conv[:, :n_steps]
    return out


def lag_kernel(bank: ResolventBank, rule: str = DEFAULT_RULE) -> np.ndarray:
    """Weights of dW_i at lag m = j-1-i, shape (modes, steps)"""
    s = bank.s
    if rule == "left":
        return s[:, 1:].copy()
    if rule == "midpoint":
        return 0.5 * (s[:, :-1] + s[:, 1:])
    if rule == "local":
        kernel = s[:, 1:].copy()
        kernel[:, 0] = 0.0  # last interval is sampled exactly
        return kernel
    raise ParameterOutOfRange(f"unknown rule {rule!r}; expected one of {RULES}")


def convolve_increments(
    bank: ResolventBank,
    weighted: np.ndarray,
    rule: str = DEFAULT_RULE,
    weighted_local: Optional[np.ndarray] = None,
    kernel: Optional[np.ndarray] = None,
) -> np.ndarray:
    """sum over past steps of S(t_j - t_i) applied to weighted increments G dW_i.

    For the local rule, weighted_local carries G sqrt(q) xi for the exact
    sampling of the last interval.
    """
    kernel = lag_kernel(bank, rule) if kernel is None else kernel
    out = causal_convolve(kernel, weighted)
    if rule == "local":
        if weighted_local is None:
            raise ParameterOutOfRange("local rule needs the independent normals")
        mean, spread = bank.local_moments()
        out[:, 1:] += mean[:, None] * weighted + spread[:, None] * weighted_local
    return out


def stochastic_convolution(
    bank: ResolventBank,
    cov: CovarianceSpec,
    grid: TimeGrid,
    seed: int,
    path_index: int,
    g_diag: ArrayLike,
    rule: str = DEFAULT_RULE,
    noise: Optional[NoisePath] = None,
) -> FieldPath:
    """Mode-wise Ito sum of s_k(t_j - t_i) g_k dW_{k,i} over i < j"""
    check_grid(bank, grid)
    if rule not in RULES:
        raise ParameterOutOfRange(f"unknown rule {rule!r}; expected one of {RULES}")
    if noise is None:
        noise = sample_increments(
            cov,
            grid,
            seed,
            path_index,
            bank.n_modes,
            bank.basis,
            with_local=rule == "local",
        )
    elif noise.n_modes != bank.n_modes or not noise.grid.same_as(grid):
        raise GridMismatch("noise path does not match the bank")
    g = np.broadcast_to(np.asarray(g_diag, dtype=float), (bank.n_modes,))[:, None]
    weighted_local = None if noise.local is None else g * noise.local
    coeffs = convolve_increments(bank, g * noise.increments, rule, weighted_local)
    return FieldPath(coeffs, bank.basis, grid.nodes)


def discrete_second_moment(
    bank: ResolventBank,
    cov: CovarianceSpec,
    g_diag: ArrayLike,
    node: int,
    rule: str = DEFAULT_RULE,
    beta: float = 0.0,
) -> float:
    """Exact E||W_S(t_j)||^2 in H^beta for the discrete sum of the chosen rule"""
    if node < 0 or node > bank.grid.steps:
        raise ParameterOutOfRange(f"node {node} outside the grid")
    dt = bank.grid.dt
    g = np.broadcast_to(np.asarray(g_diag, dtype=float), (bank.n_modes,))
    weight = bank.basis.powers(beta) * cov.eigenvalues(bank.basis) * g ** 2
    if node == 0:
        return 0.0
    kernel = lag_kernel(bank, rule)[:, :node]
    per_mode = np.sum(kernel ** 2, axis=1) * dt
    if rule == "local":
        mean, spread = bank.local_moments()
        per_mode = per_mode + mean ** 2 * dt + spread ** 2
    return float(np.sum(weight * per_mode))

