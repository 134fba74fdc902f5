"""
Drift F and diffusion G in spectral coordinates
"""

from abc import ABC, abstractmethod
from typing import Callable, Dict, Sequence

import numpy as np

from src.spectral.basis import SpectralBasis, SpectralField
from src.spectral.transforms import analyze, synthesize
from src.utils.errors import ParameterOutOfRange

SCALAR_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "arctan": np.arctan,
}


def _scalar_function(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return SCALAR_FUNCTIONS[name]
    except KeyError:
        raise ParameterOutOfRange(
            f"unknown scalar function {name!r}; "
            f"expected one of {sorted(SCALAR_FUNCTIONS)}"
        )


def _per_mode(basis: SpectralBasis, coefficients: Sequence[float]) -> np.ndarray:
    values = np.asarray(coefficients, dtype=float)
    return np.broadcast_to(values, (basis.n_modes,)).copy()


def _to_points(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """(modes, ...) coefficients to (..., points) values"""
    return synthesize(np.moveaxis(coeffs, 0, -1), n_points)


def _to_modes(values: np.ndarray, n_modes: int) -> np.ndarray:
    return np.moveaxis(analyze(values, n_modes), -1, 0)


class FMap(ABC):
    """Drift acting on coefficient arrays whose first axis indexes modes"""

    variant = "F"
    lipschitz = 0.0

    def __init__(self, basis: SpectralBasis) -> None:
        self.basis = basis

    @abstractmethod
    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        ...

    @property
    def is_zero(self) -> bool:
        return False

    def describe(self) -> Dict[str, object]:
        return {"variant": self.variant, "lipschitz": self.lipschitz}


class ZeroDrift(FMap):
    variant = "zero"

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return np.zeros_like(coeffs)

    @property
    def is_zero(self) -> bool:
        return True


class DiagonalLinear(FMap):
    """(F u)_k = c_k u_k"""

    variant = "diagonal-linear"

    def __init__(self, basis: SpectralBasis, coefficients: Sequence[float]) -> None:
        super().__init__(basis)
        c = _per_mode(basis, coefficients)
        self.coefficients = c
        self.lipschitz = float(np.max(np.abs(c)))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        shape = (-1,) + (1,) * (coeffs.ndim - 1)
        return self.coefficients.reshape(shape) * coeffs


class NemytskiiDrift(FMap):
    """F(u)(x) = L f(u(x)) evaluated on the collocation grid"""

    variant = "nemytskii"

    def __init__(
        self, basis: SpectralBasis, function: str = "sin", lipschitz: float = 1.0
    ) -> None:
        super().__init__(basis)
        self.function = function
        self._func = _scalar_function(function)
        self.lipschitz = float(lipschitz)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        values = _to_points(coeffs, self.basis.n_points)
        return _to_modes(self.lipschitz * self._func(values), self.basis.n_modes)

    def describe(self) -> Dict[str, object]:
        return {
            "variant": self.variant,
            "function": self.function,
            "lipschitz": self.lipschitz,
        }


class GMap(ABC):
    """Diffusion: G(u) applied to noise increments, both (modes, steps)"""

    variant = "G"
    lipschitz = 0.0

    def __init__(self, basis: SpectralBasis) -> None:
        self.basis = basis

    @abstractmethod
    def apply(self, coeffs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        ...

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def is_additive(self) -> bool:
        """G does not depend on u"""
        return False

    def describe(self) -> Dict[str, object]:
        return {"variant": self.variant, "lipschitz": self.lipschitz}


class ZeroNoise(GMap):
    variant = "zero"

    def apply(self, coeffs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return np.zeros_like(noise)

    @property
    def is_zero(self) -> bool:
        return True

    @property
    def is_additive(self) -> bool:
        return True


class AdditiveIdentity(GMap):
    variant = "additive"

    def apply(self, coeffs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return noise

    @property
    def is_additive(self) -> bool:
        return True


class DiagonalMultiplicative(GMap):
    """G(u) dW = sum_k g_k u_k dbeta_k e_k"""

    variant = "diagonal-multiplicative"

    def __init__(self, basis: SpectralBasis, coefficients: Sequence[float]) -> None:
        super().__init__(basis)
        g = _per_mode(basis, coefficients)
        self.coefficients = g
        self.lipschitz = float(np.max(np.abs(g)))

    def apply(self, coeffs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return self.coefficients[:, None] * coeffs * noise


class NemytskiiMultiplicative(GMap):
    """(G(u) dW)(x) = L g(u(x)) dW(x) as a pointwise product on the collocation grid"""

    variant = "nemytskii"

    def __init__(
        self, basis: SpectralBasis, function: str = "sin", lipschitz: float = 1.0
    ) -> None:
        super().__init__(basis)
        self.function = function
        self._func = _scalar_function(function)
        self.lipschitz = float(lipschitz)

    def apply(self, coeffs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        n_points = self.basis.n_points
        values = self.lipschitz * self._func(_to_points(coeffs, n_points))
        return _to_modes(values * _to_points(noise, n_points), self.basis.n_modes)

    def describe(self) -> Dict[str, object]:
        return {
            "variant": self.variant,
            "function": self.function,
            "lipschitz": self.lipschitz,
        }


def apply_F(f_map: FMap, f: SpectralField) -> SpectralField:
    """F applied to a single field"""
    return SpectralField(f_map.apply(f.coeffs), f.basis)
