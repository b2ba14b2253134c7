from dataclasses import dataclass
from typing import Optional

import numpy as np

from models.base import BaseModel
from models.errors import DataFormatError, DimensionMismatchError
from models.input_space import frozen_array


@dataclass(frozen=True, eq=False)
class FunctionalOutputs(BaseModel):
    """n x m matrix of vector outputs, row i being f(x_i)."""

    values: np.ndarray
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        values = frozen_array(self.values, name="outputs")
        if values.ndim == 1:
            values = frozen_array(values[None, :], name="outputs")
        if values.ndim != 2:
            raise DimensionMismatchError(f"outputs must be a matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataFormatError("outputs contain non-finite entries")
        object.__setattr__(self, "values", values)
        if self.grid is not None:
            grid = frozen_array(self.grid, ndim=1, name="grid")
            if grid.shape[0] != values.shape[1]:
                raise DimensionMismatchError(f"grid has {grid.shape[0]} points for {values.shape[1]} output dimensions")
            object.__setattr__(self, "grid", grid)

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def coordinates(self):
        """Grid coordinates, or 0..m-1 when none were given."""
        return self.grid if self.grid is not None else np.arange(self.width, dtype=float)

    def head(self, n):
        return FunctionalOutputs(self.values[:n], self.grid)

    def take(self, rows):
        return FunctionalOutputs(self.values[np.asarray(rows, dtype=int)], self.grid)

    def check_rows(self, design):
        if design.size != self.size:
            raise DimensionMismatchError(f"{self.size} output rows for a design of {design.size} points")
