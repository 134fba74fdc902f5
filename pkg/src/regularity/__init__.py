# Regularity package
from src.regularity.holder import estimate_holder, pathwise_holder
from src.regularity.kappa import (
    kappa_integrals,
    kappa_integrals_by_quadrature,
    kappa_slopes,
)
from src.regularity.maximal import max_bound, refinement_stability
from src.regularity.report import RegularityReport, build_regularity_report

__all__ = [
    "RegularityReport",
    "build_regularity_report",
    "estimate_holder",
    "kappa_integrals",
    "kappa_integrals_by_quadrature",
    "kappa_slopes",
    "max_bound",
    "pathwise_holder",
    "refinement_stability",
]
