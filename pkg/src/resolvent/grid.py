"""
Time grids on [0, T]
"""

from dataclasses import dataclass, field

import numpy as np

from src.utils.errors import GridMismatch, ParameterOutOfRange


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing nodes from 0 to T"""

    horizon: float
    nodes: np.ndarray = field(repr=False)
    kind: str = "uniform"
    grading: float = 1.0

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ParameterOutOfRange("a time grid needs at least two nodes")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ParameterOutOfRange(
                "grid nodes must start at 0 and increase strictly"
            )
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeGrid":
        if horizon <= 0 or steps < 1:
            raise ParameterOutOfRange("uniform grid needs T > 0 and N >= 1")
        nodes = horizon * np.arange(steps + 1) / steps
        return cls(horizon=float(horizon), nodes=nodes, kind="uniform")

    @classmethod
    def graded(cls, horizon: float, steps: int, grading: float = 2.0) -> "TimeGrid":
        """t_j = T (j/N)^grading"""
        if horizon <= 0 or steps < 1 or grading < 1.0:
            raise ParameterOutOfRange(
                "graded grid needs T > 0, N >= 1 and grading >= 1"
            )
        nodes = horizon * (np.arange(steps + 1) / steps) ** grading
        nodes[-1] = horizon
        return cls(
            horizon=float(horizon), nodes=nodes, kind="graded", grading=float(grading)
        )

    @property
    def steps(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def is_uniform(self) -> bool:
        return self.kind == "uniform"

    @property
    def dt(self) -> float:
        """Step of a uniform grid"""
        if not self.is_uniform:
            raise GridMismatch("graded grid has no single step")
        return self.horizon / self.steps

    def scaled(self, factor: float) -> "TimeGrid":
        """Same node pattern on [0, factor T]"""
        return TimeGrid(horizon=self.horizon * factor, nodes=self.nodes * factor,
                        kind=self.kind, grading=self.grading)

    def coarsened(self, levels: int = 1) -> "TimeGrid":
        """Every 2^levels-th node; the inverse of halving each step levels times"""
        stride = 2 ** levels
        if levels < 0 or self.steps % stride:
            raise GridMismatch(f"{self.steps} steps cannot be coarsened {levels} times")
        return TimeGrid(
            horizon=self.horizon,
            nodes=self.nodes[::stride],
            kind=self.kind,
            grading=self.grading,
        )

    def index_of(self, t: float) -> int:
        """Node index of time t (must be a node)"""
        j = int(np.argmin(np.abs(self.nodes - t)))
        if not np.isclose(self.nodes[j], t, rtol=1e-12, atol=1e-14 * self.horizon):
            raise GridMismatch(f"t={t} is not a grid node")
        return j

    def same_as(self, other: "TimeGrid") -> bool:
        if self.nodes.shape != other.nodes.shape:
            return False
        return bool(np.array_equal(self.nodes, other.nodes))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "steps": self.steps,
            "grading": self.grading,
        }
