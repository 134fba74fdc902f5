"""
Exception hierarchy shared by every module
"""

from typing import Dict, Optional, Sequence


class VolterraLabError(Exception):
    """Base class; exit_code is what the CLI returns"""

    exit_code = 2


class ConfigError(VolterraLabError):
    """Invalid or missing configuration value"""

    exit_code = 1

    def __init__(self, key: str, problem: str, line: Optional[int] = None) -> None:
        self.key = key
        self.problem = problem
        self.line = line
        message = f"{key}: {problem}"
        if line is not None:
            message += f" (line {line})"
        super().__init__(message)


class VerificationFailure(VolterraLabError):
    """A measured quantity lies outside its tolerance"""

    exit_code = 3


class NumericalError(VolterraLabError):
    """Numerical failure inside a library routine"""


class NonPositiveTime(NumericalError):
    pass


class OutsideTabulatedRange(NumericalError):
    pass


class NonanalyticPoint(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class DerivativeUnavailable(NumericalError):
    pass


class BoundaryLimitUnstable(NumericalError):
    pass


class KernelMomentFailure(NumericalError):
    pass


class ParameterOutOfRange(NumericalError, ValueError):
    pass


class HorizonTooShort(NumericalError):
    pass


class SpectralTruncationDominates(NumericalError):
    pass


class GridMismatch(NumericalError):
    pass


class TransformSizeMismatch(NumericalError):
    pass


class LagOutOfRange(NumericalError):
    pass


class EnsembleTooSmall(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    """Step too large for the mode's time scale"""

    def __init__(self, message: str, mode_index: Optional[int] = None) -> None:
        self.mode_index = mode_index
        if mode_index is not None:
            message = f"mode {mode_index}: {message}"
        super().__init__(message)


class NoContraction(NumericalError):
    """Picard distances did not reach the tolerance"""

    def __init__(self, alpha: float, distances: Sequence[float]) -> None:
        self.alpha = alpha
        self.distances = list(distances)
        last = self.distances[-1] if self.distances else float("nan")
        super().__init__(
            f"no contraction at alpha={alpha:.6g} after {len(self.distances)} "
            f"iterations (last distance {last:.3e}); increase alpha"
        )


class EnsembleFailure(NumericalError):
    """One or more paths of an ensemble failed"""

    def __init__(self, failures: Dict[int, str]) -> None:
        self.failures = dict(failures)
        listed = ", ".join(str(i) for i in sorted(self.failures)[:10])
        super().__init__(f"{len(self.failures)} path(s) failed: {listed}")
