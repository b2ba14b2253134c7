from dataclasses import dataclass

import numpy as np

from models.base import BaseModel
from models.errors import DimensionMismatchError, InvalidDesignError


def frozen_array(values, ndim=None, name="array"):
    """Copy ``values`` into a read-only float array."""
    array = np.array(values, dtype=float)
    if ndim is not None and array.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class InputSpace(BaseModel):
    """Independent uniform input variables on a bounded box."""

    names: tuple
    bounds: np.ndarray

    def __post_init__(self):
        bounds = frozen_array(self.bounds, ndim=2, name="bounds")
        if bounds.shape[0] < 1 or bounds.shape[1] != 2:
            raise InvalidDesignError(f"bounds must be a (d, 2) array, got {bounds.shape}")
        if not np.all(np.isfinite(bounds)) or np.any(bounds[:, 0] >= bounds[:, 1]):
            raise InvalidDesignError("every variable needs finite bounds with lower < upper")
        names = tuple(str(name) for name in self.names)
        if len(names) != bounds.shape[0]:
            raise DimensionMismatchError(f"{len(names)} names for {bounds.shape[0]} variables")
        if len(set(names)) != len(names):
            raise InvalidDesignError(f"duplicate variable names in {names}")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "names", names)

    @classmethod
    def unit(cls, dims, prefix="x"):
        return cls(tuple(f"{prefix}{i + 1}" for i in range(dims)), np.tile([0.0, 1.0], (dims, 1)))

    @property
    def dims(self):
        return self.bounds.shape[0]

    @property
    def lower(self):
        return self.bounds[:, 0]

    @property
    def upper(self):
        return self.bounds[:, 1]

    @property
    def ranges(self):
        return self.upper - self.lower

    def scale(self, unit_points):
        """Map points of [0, 1]^d onto the box."""
        return self.lower + np.asarray(unit_points, dtype=float) * self.ranges

    def contains(self, points):
        points = np.asarray(points, dtype=float)
        return bool(np.all((points >= self.lower) & (points <= self.upper)))

    def index_of(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidDesignError(f"unknown variable '{name}', expected one of {self.names}") from None


@dataclass(frozen=True, eq=False)
class DesignMatrix(BaseModel):
    """n x d design of experiments inside an InputSpace."""

    points: np.ndarray
    space: InputSpace

    def __post_init__(self):
        points = frozen_array(self.points, ndim=2, name="points")
        if points.shape[1] != self.space.dims:
            raise DimensionMismatchError(
                f"design has {points.shape[1]} columns but the input space has {self.space.dims} variables"
            )
        if points.shape[0] < 1:
            raise InvalidDesignError("design has no rows")
        if not self.space.contains(points):
            raise InvalidDesignError("design points fall outside the input space bounds")
        object.__setattr__(self, "points", points)

    @property
    def size(self):
        return self.points.shape[0]

    def head(self, n):
        """Nested prefix subset used by DoE-size sweeps."""
        if n < 2 or n > self.size:
            raise InvalidDesignError(f"cannot take a prefix of {n} rows from a design of {self.size}")
        return DesignMatrix(self.points[:n], self.space)

    def take(self, rows):
        return DesignMatrix(self.points[np.asarray(rows, dtype=int)], self.space)

    def concat(self, other):
        if other.space.dims != self.space.dims:
            raise DimensionMismatchError("cannot concatenate designs of different dimension")
        return DesignMatrix(np.vstack([self.points, other.points]), self.space)
