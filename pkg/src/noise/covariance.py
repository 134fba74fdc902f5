"""
Diagonal covariances of the driving Wiener process and Hilbert-Schmidt norms
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.spectral.basis import SpectralBasis
from src.utils.errors import ParameterOutOfRange
from src.utils.fitting import fit_loglog

KINDS = ("white", "power", "custom")


@dataclass(frozen=True)
class CovarianceSpec:
    """q_k in the eigenbasis: white (q_k = 1), power (lambda_k^-gamma) or custom"""

    kind: str = "white"
    gamma: float = 0.0
    values: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ParameterOutOfRange(f"unknown covariance kind {self.kind!r}")
        if self.kind == "custom" and any(v < 0 for v in self.values):
            raise ParameterOutOfRange("custom covariance entries must be >= 0")

    @classmethod
    def white(cls) -> "CovarianceSpec":
        return cls("white")

    @classmethod
    def power(cls, gamma: float) -> "CovarianceSpec":
        return cls("power", gamma=float(gamma))

    @classmethod
    def custom(cls, values: Sequence[float]) -> "CovarianceSpec":
        return cls("custom", values=tuple(float(v) for v in values))

    @property
    def trace_class(self) -> Optional[bool]:
        """Whether sum q_k converges over the full basis; None when unknown"""
        if self.kind == "white":
            return False
        if self.kind == "power":
            return self.gamma > 0.5
        return None

    def eigenvalues(self, basis: SpectralBasis) -> np.ndarray:
        n = basis.n_modes
        if self.kind == "white":
            return np.ones(n)
        if self.kind == "power":
            return basis.eigenvalues ** (-self.gamma)
        if len(self.values) < n:
            raise ParameterOutOfRange(
                f"custom covariance has {len(self.values)} entries, basis needs {n}"
            )
        return np.asarray(self.values[:n], dtype=float)

    def describe(self) -> Dict[str, object]:
        info: Dict[str, object] = {"kind": self.kind}
        if self.kind == "power":
            info["gamma"] = self.gamma
        if self.kind == "custom":
            info["entries"] = len(self.values)
        return info


@dataclass
class HSNorm:
    """Truncated Hilbert-Schmidt norm with the convergence verdict of its series"""

    value: float
    partial_sums: np.ndarray
    tail_exponent: float
    converges: bool

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "modes": int(self.partial_sums.size),
            "tail_exponent": self.tail_exponent,
            "converges": self.converges,
        }


def hs_norm(
    op_diag: ArrayLike, r_w: float, cov: CovarianceSpec, basis: SpectralBasis
) -> HSNorm:
    """(sum_k q_k lambda_k^{r_w} T_k^2)^{1/2} for a diagonal operator T.

    The series converges when its terms decay faster than 1/k; the decay
    exponent is fitted on the upper half of the modes.
    """
    diag = np.broadcast_to(np.asarray(op_diag, dtype=float), (basis.n_modes,))
    terms = cov.eigenvalues(basis) * basis.powers(r_w) * diag ** 2
    partial = np.cumsum(terms)
    k = basis.wavenumbers
    tail = k >= max(2, basis.n_modes // 2)
    positive = tail & (terms > 0)
    if positive.sum() < 2:
        exponent = -np.inf
    else:
        exponent = fit_loglog(k[positive], terms[positive]).slope
    return HSNorm(
        value=float(np.sqrt(partial[-1])),
        partial_sums=partial,
        tail_exponent=float(exponent),
        converges=bool(exponent < -1.0),
    )
