"""
Problem definition for the stochastic Volterra equation in spectral coordinates
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from config.settings import DEFAULT_MOMENT, DEFAULT_RULE
from src.kernel.kernels import KernelSpec
from src.noise.covariance import CovarianceSpec
from src.noise.increments import STREAM_INITIAL, standard_normals
from src.spectral.basis import SpectralBasis, SpectralField
from src.solver.maps import FMap, GMap
from src.utils.errors import ParameterOutOfRange

INITIAL_KINDS = ("zero", "field", "random")


@dataclass(frozen=True, eq=False)
class InitialData:
    """u0: zero, a fixed field, or random coefficients lambda_k^{-decay/2} z_k"""

    kind: str = "zero"
    coeffs: Optional[np.ndarray] = field(default=None, repr=False)
    decay: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in INITIAL_KINDS:
            raise ParameterOutOfRange(f"unknown initial data kind {self.kind!r}")
        if self.kind == "field" and self.coeffs is None:
            raise ParameterOutOfRange("field initial data needs coefficients")

    @classmethod
    def zero(cls) -> "InitialData":
        return cls("zero")

    @classmethod
    def from_field(cls, f: SpectralField) -> "InitialData":
        return cls("field", coeffs=np.array(f.coeffs))

    @classmethod
    def from_modes(cls, coeffs: Sequence[float]) -> "InitialData":
        return cls("field", coeffs=np.asarray(coeffs, dtype=float))

    @classmethod
    def random(cls, decay: float) -> "InitialData":
        return cls("random", decay=float(decay))

    @property
    def is_random(self) -> bool:
        return self.kind == "random"

    def sample(
        self, basis: SpectralBasis, seed: int = 0, path_index: int = 0
    ) -> SpectralField:
        if self.kind == "zero":
            return basis.zero()
        if self.kind == "field":
            coeffs = np.zeros(basis.n_modes)
            n = min(basis.n_modes, self.coeffs.size)
            coeffs[:n] = self.coeffs[:n]
            return SpectralField(coeffs, basis)
        z = standard_normals(seed, path_index, basis.n_modes, 1, STREAM_INITIAL)[:, 0]
        return SpectralField(basis.powers(-self.decay / 2.0) * z, basis)

    def describe(self) -> Dict[str, object]:
        info: Dict[str, object] = {"kind": self.kind}
        if self.kind == "random":
            info["decay"] = self.decay
        return info


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """u' + (b * A u) = F(u) + G(u) dW/dt, u(0) = u0, on [0, T]"""

    kernel: KernelSpec
    basis: SpectralBasis
    cov: CovarianceSpec
    f_map: FMap
    g_map: GMap
    u0: InitialData
    horizon: float
    r: float
    rho: Optional[float] = None
    p: int = DEFAULT_MOMENT
    rule: str = DEFAULT_RULE

    def __post_init__(self) -> None:
        rho = self.rho if self.rho is not None else self.kernel.rho
        if rho is None:
            raise ParameterOutOfRange("problem needs rho from the kernel or explicitly")
        object.__setattr__(self, "rho", float(rho))
        if not 1.0 < self.rho < 2.0:
            raise ParameterOutOfRange(f"rho must lie in (1, 2), got {self.rho}")
        if self.r >= 1.0:
            raise ParameterOutOfRange(f"r must be < 1, got {self.r}")
        if self.p < 2:
            raise ParameterOutOfRange(f"moment order p must be >= 2, got {self.p}")
        if self.horizon <= 0:
            raise ParameterOutOfRange("horizon must be positive")
        for name, mapping in (("F", self.f_map), ("G", self.g_map)):
            if mapping.basis.n_modes != self.basis.n_modes:
                raise ParameterOutOfRange(f"{name} map uses a basis of different size")

    @property
    def s0(self) -> float:
        """Solution space exponent r - 1 + 1/rho"""
        return self.r - 1.0 + 1.0 / self.rho

    @property
    def initial_data_exponent(self) -> float:
        """u0 regularity: r - 1 + 2/rho if b^ <~ lam^{1-rho}, else r + 1/rho"""
        if self.kernel.asymptotic_power:
            return self.r - 1.0 + 2.0 / self.rho
        return self.r + 1.0 / self.rho

    @property
    def holder_ceiling(self) -> float:
        """Spatial exponents must stay below r - 1 + 2/rho"""
        return self.r - 1.0 + 2.0 / self.rho

    def kappa(self, s: float) -> float:
        return (self.r - s - 1.0) * self.rho

    def predicted_exponent(self, s: float) -> float:
        return min(0.5, self.kappa(s) / 2.0 + 1.0)

    @property
    def lipschitz_sum(self) -> float:
        return self.f_map.lipschitz + self.g_map.lipschitz

    @property
    def constant_map(self) -> bool:
        """Phi does not depend on u"""
        return self.f_map.is_zero and self.g_map.is_additive

    def describe(self) -> Dict[str, object]:
        return {
            "kernel": self.kernel.describe(),
            "modes": self.basis.n_modes,
            "covariance": self.cov.describe(),
            "F": self.f_map.describe(),
            "G": self.g_map.describe(),
            "u0": self.u0.describe(),
            "horizon": self.horizon,
            "r": self.r,
            "rho": self.rho,
            "p": self.p,
            "rule": self.rule,
            "s0": self.s0,
            "initial_data_exponent": self.initial_data_exponent,
        }
