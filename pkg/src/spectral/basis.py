"""
Dirichlet Laplacian on (0, 1): eigenpairs, fields and fractional powers
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike

from config.settings import DEFAULT_MODES
from src.spectral.transforms import (
    analyze,
    collocation_points,
    collocation_size,
    synthesize,
)
from src.utils.errors import ParameterOutOfRange, TransformSizeMismatch


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """lambda_k = (k pi)^2, e_k = sqrt(2) sin(k pi x), k = 1..N"""

    n_modes: int = DEFAULT_MODES
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ParameterOutOfRange("basis needs at least one mode")
        values = (np.pi * np.arange(1, self.n_modes + 1)) ** 2
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.n_modes + 1)

    @property
    def n_points(self) -> int:
        return collocation_size(self.n_modes)

    def points(self) -> np.ndarray:
        return collocation_points(self.n_points)

    def eigenfunction(self, k: int, x: ArrayLike) -> np.ndarray:
        return np.sqrt(2.0) * np.sin(k * np.pi * np.asarray(x, dtype=float))

    def powers(self, s: float) -> np.ndarray:
        """lambda_k^s"""
        return self.eigenvalues ** s

    def unit(self, k: int) -> "SpectralField":
        """e_k as a field (k is 1-based)"""
        if not 1 <= k <= self.n_modes:
            raise ParameterOutOfRange(f"mode {k} outside 1..{self.n_modes}")
        coeffs = np.zeros(self.n_modes)
        coeffs[k - 1] = 1.0
        return SpectralField(coeffs, self)

    def zero(self) -> "SpectralField":
        return SpectralField(np.zeros(self.n_modes), self)

    def project(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        n_points: Optional[int] = None,
    ) -> "SpectralField":
        """Sine coefficients of func sampled on the collocation grid"""
        n_points = n_points or self.n_points
        samples = func(collocation_points(n_points))
        return SpectralField(analyze(samples, self.n_modes), self)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coordinates of v against e_k"""

    coeffs: np.ndarray
    basis: SpectralBasis = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.n_modes,):
            raise TransformSizeMismatch(
                f"expected {self.basis.n_modes} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def _check(self, other: "SpectralField") -> None:
        if other.basis.n_modes != self.basis.n_modes:
            raise TransformSizeMismatch("fields live on bases of different size")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.coeffs + other.coeffs, self.basis)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.coeffs - other.coeffs, self.basis)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.coeffs * scalar, self.basis)

    __rmul__ = __mul__

    def scale(self, factors: np.ndarray) -> "SpectralField":
        """Mode-wise multiplication"""
        return SpectralField(self.coeffs * factors, self.basis)

    def hdot_norm(self, beta: float) -> float:
        return hdot_norm(beta, self)

    def frac_power(self, s: float) -> "SpectralField":
        return frac_power_apply(s, self)

    def values(self, n_points: Optional[int] = None) -> np.ndarray:
        """Point values on the collocation grid"""
        return synthesize(self.coeffs, n_points or self.basis.n_points)


def frac_power_apply(s: float, f: SpectralField) -> SpectralField:
    """A^s f"""
    if s == 0:
        return f
    return f.scale(f.basis.powers(s))


def hdot_norm(beta: float, f: SpectralField) -> float:
    """(sum_k lambda_k^beta c_k^2)^{1/2}"""
    return float(np.sqrt(np.sum(f.basis.powers(beta) * f.coeffs ** 2)))


def hdot_norms(beta: float, coeffs: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """H^beta norms of coefficient arrays whose first axis indexes the modes"""
    weights = basis.powers(beta).reshape((-1,) + (1,) * (np.ndim(coeffs) - 1))
    return np.sqrt(np.sum(weights * np.asarray(coeffs) ** 2, axis=0))


@dataclass(frozen=True, eq=False)
class FieldPath:
    """Coefficients of a field at every grid node, shape (modes, nodes)"""

    coeffs: np.ndarray = field(repr=False)
    basis: SpectralBasis = field(repr=False)
    times: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.n_modes, np.size(self.times)):
            raise TransformSizeMismatch(f"path has shape {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_nodes(self) -> int:
        return self.coeffs.shape[1]

    def at(self, j: int) -> SpectralField:
        return SpectralField(self.coeffs[:, j], self.basis)

    def norms(self, beta: float) -> np.ndarray:
        """H^beta norm at every node"""
        return hdot_norms(beta, self.coeffs, self.basis)
