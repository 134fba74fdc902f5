# Solver package
from src.solver.ensemble import EnsembleResult, MeasurementPlan, ensemble_solve
from src.solver.maps import (
    AdditiveIdentity,
    DiagonalLinear,
    DiagonalMultiplicative,
    NemytskiiDrift,
    NemytskiiMultiplicative,
    ZeroDrift,
    ZeroNoise,
    apply_F,
)
from src.solver.picard import (
    PicardCertificate,
    PicardMap,
    PicardState,
    PicardSummary,
    iterate_picard,
    picard_solve,
)
from src.solver.problem import InitialData, ProblemSpec

__all__ = [
    "AdditiveIdentity",
    "DiagonalLinear",
    "DiagonalMultiplicative",
    "EnsembleResult",
    "InitialData",
    "MeasurementPlan",
    "NemytskiiDrift",
    "NemytskiiMultiplicative",
    "PicardCertificate",
    "PicardMap",
    "PicardState",
    "PicardSummary",
    "ProblemSpec",
    "ZeroDrift",
    "ZeroNoise",
    "apply_F",
    "ensemble_solve",
    "iterate_picard",
    "picard_solve",
]
