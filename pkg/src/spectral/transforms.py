"""
Sine transforms between mode coefficients and collocation values on (0, 1)
"""

import numpy as np
from scipy import fft

from config.settings import OVERSAMPLING
from src.utils.errors import TransformSizeMismatch


def collocation_size(n_modes: int) -> int:
    """Number of interior points M = OVERSAMPLING * N + 1"""
    return OVERSAMPLING * n_modes + 1


def collocation_points(n_points: int) -> np.ndarray:
    """x_m = m / (M + 1), m = 1..M"""
    return np.arange(1, n_points + 1) / (n_points + 1)


def synthesize(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """u(x_m) = sum_k c_k sqrt(2) sin(k pi x_m) along the last axis"""
    coeffs = np.asarray(coeffs, dtype=float)
    n_modes = coeffs.shape[-1]
    if n_points < n_modes:
        raise TransformSizeMismatch(f"{n_points} points cannot carry {n_modes} modes")
    padded = np.zeros(coeffs.shape[:-1] + (n_points,))
    padded[..., :n_modes] = coeffs
    return np.sqrt(n_points + 1.0) * fft.dst(padded, type=1, norm="ortho", axis=-1)


def analyze(values: np.ndarray, n_modes: int) -> np.ndarray:
    """Inverse of synthesize: first n_modes sine coefficients of the point values"""
    values = np.asarray(values, dtype=float)
    n_points = values.shape[-1]
    if n_points < n_modes:
        raise TransformSizeMismatch(f"{n_points} points cannot resolve {n_modes} modes")
    coeffs = fft.dst(values, type=1, norm="ortho", axis=-1) / np.sqrt(n_points + 1.0)
    return coeffs[..., :n_modes]
