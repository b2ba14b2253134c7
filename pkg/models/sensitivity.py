from dataclasses import dataclass
from enum import Enum

import numpy as np


class IndexKind(Enum):
    CLOSED = "closed"
    TOTAL = "total"
    PLUGIN = "plugin"


@dataclass(frozen=True, eq=False)
class SensitivityMap:
    """Per-output-dimension indices; undefined pixels are NaN."""

    values: np.ndarray
    numerators: np.ndarray
    denominators: np.ndarray

    def out_of_range(self, slack):
        """Mask of defined values outside [-slack, 1 + slack]."""
        with np.errstate(invalid="ignore"):
            return (self.values < -slack) | (self.values > 1.0 + slack)

    @property
    def undefined(self):
        return np.isnan(self.values)


@dataclass(frozen=True)
class GsiValue:
    value: float
    numerator: float
    denominator: float
    kind: IndexKind = IndexKind.CLOSED
