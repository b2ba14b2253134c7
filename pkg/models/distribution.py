from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from models.errors import DimensionMismatchError
from models.pick_freeze import IndexSet
from models.sensitivity import IndexKind


class SummaryScope(Enum):
    METAMODEL = "metamodel-only"
    OVERALL = "overall"


@dataclass(frozen=True, eq=False)
class IndexDistribution:
    """Index estimates over (output dimension l, trajectory j, replicate b).

    Replicate b = 0 is the un-resampled estimate, so the slice
    ``maps[:, :, 0]`` carries metamodeling error only.
    """

    maps: np.ndarray
    gsi: np.ndarray
    index_set: IndexSet
    kind: IndexKind = IndexKind.CLOSED
    n_pf: int = 0

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=float)
        gsi = np.asarray(self.gsi, dtype=float)
        if maps.ndim != 3 or gsi.ndim != 2 or maps.shape[1:] != gsi.shape:
            raise DimensionMismatchError(f"inconsistent distribution shapes {maps.shape} and {gsi.shape}")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "gsi", gsi)

    @property
    def width(self):
        return self.maps.shape[0]

    @property
    def n_trajectories(self):
        return self.maps.shape[1]

    @property
    def n_replicates(self):
        return self.maps.shape[2]

    def metamodel_only(self):
        """(maps m x N_Z, gsi N_Z) restricted to the un-resampled replicate."""
        return self.maps[:, :, 0], self.gsi[:, 0]

    def overall(self):
        """(maps m x N_Z*N_X, gsi N_Z*N_X) over every (j, b)."""
        return self.maps.reshape(self.width, -1), self.gsi.reshape(-1)

    def view(self, scope):
        scope = SummaryScope(scope)
        return self.metamodel_only() if scope is SummaryScope.METAMODEL else self.overall()


@dataclass(frozen=True)
class BoxplotSummary:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    p5: float
    p95: float
    outliers: int
    count: int
    missing: int = 0

    @property
    def iqr(self):
        return self.q3 - self.q1

    def as_row(self):
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "p5": self.p5,
            "p95": self.p95,
            "outliers": self.outliers,
            "count": self.count,
            "missing": self.missing,
        }


@dataclass(frozen=True, eq=False)
class Attribution:
    """IQR-based shares of metamodeling and pick-freeze estimation error."""

    metamodel_share: np.ndarray
    estimation_share: np.ndarray
    width_metamodel: np.ndarray
    width_overall: np.ndarray

    @property
    def undefined(self):
        return np.isnan(self.estimation_share)


@dataclass(frozen=True, eq=False)
class Q2Report:
    """Q2 per (trajectory, output dimension) and its percentile curves."""

    values: np.ndarray
    p5: np.ndarray
    p50: np.ndarray
    p95: np.ndarray
    grid: Optional[np.ndarray] = None
