# Spectral package
from src.spectral.bank import (
    ResolventBank,
    apply_S,
    apply_Sdot,
    build_resolvent_bank,
    integrated_bound,
    integrated_resolvent,
)
from src.spectral.basis import SpectralBasis, SpectralField, frac_power_apply, hdot_norm
from src.spectral.smoothing import measure_smoothing

__all__ = [
    "ResolventBank",
    "SpectralBasis",
    "SpectralField",
    "apply_S",
    "apply_Sdot",
    "build_resolvent_bank",
    "frac_power_apply",
    "hdot_norm",
    "integrated_bound",
    "integrated_resolvent",
    "measure_smoothing",
]
