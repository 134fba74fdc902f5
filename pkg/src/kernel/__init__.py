# Kernel package
from src.kernel.kernels import (
    FiniteHistory,
    KernelSpec,
    LaplaceDefined,
    Tabulated,
    TemperedRiesz,
    eval_kernel,
    eval_laplace,
)

__all__ = [
    "FiniteHistory",
    "KernelSpec",
    "LaplaceDefined",
    "Tabulated",
    "TemperedRiesz",
    "eval_kernel",
    "eval_laplace",
]
