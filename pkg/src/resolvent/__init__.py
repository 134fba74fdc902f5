# Resolvent package
from src.resolvent.grid import TimeGrid
from src.resolvent.mittag_leffler import mittag_leffler, riesz_resolvent
from src.resolvent.scalar import (
    ScalarResolventTable,
    solve_scalar,
    solve_scalar_batch,
    solve_scalar_parallel,
)

__all__ = [
    "TimeGrid",
    "ScalarResolventTable",
    "solve_scalar",
    "solve_scalar_batch",
    "solve_scalar_parallel",
    "mittag_leffler",
    "riesz_resolvent",
]
