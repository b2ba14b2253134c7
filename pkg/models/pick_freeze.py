from dataclasses import dataclass
from typing import Optional

import numpy as np

from models.base import BaseModel
from models.errors import DimensionMismatchError, InvalidDesignError
from models.input_space import frozen_array


@dataclass(frozen=True)
class IndexSet(BaseModel):
    """Sorted, non-empty set of 0-based variable indices u."""

    members: tuple
    dims: int

    def __post_init__(self):
        members = tuple(sorted({int(i) for i in self.members}))
        if not members:
            raise InvalidDesignError("an index set cannot be empty")
        if members[0] < 0 or members[-1] >= self.dims:
            raise InvalidDesignError(f"index set {members} out of range for d={self.dims}")
        object.__setattr__(self, "members", members)

    @classmethod
    def single(cls, i, dims):
        return cls((i,), dims)

    @property
    def mask(self):
        """Bit mask of the set, used as a seed key."""
        return sum(1 << i for i in self.members)

    @property
    def complement(self):
        return tuple(i for i in range(self.dims) if i not in self.members)

    def complement_set(self):
        return IndexSet(self.complement, self.dims)

    def label(self, names=None):
        if names is None:
            return "+".join(f"x{i + 1}" for i in self.members)
        return "+".join(names[i] for i in self.members)


@dataclass(frozen=True, eq=False)
class PfDesign:
    """Pick-freeze inputs: x_hat = X1, x_star = (X1_u, X2_-u), x_star_total = (X2_u, X1_-u)."""

    x_hat: np.ndarray
    x_star: np.ndarray
    x_star_total: np.ndarray
    index_set: IndexSet

    def __post_init__(self):
        for name in ("x_hat", "x_star", "x_star_total"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), ndim=2, name=name))
        if not (self.x_hat.shape == self.x_star.shape == self.x_star_total.shape):
            raise DimensionMismatchError("pick-freeze samples must share one shape")

    @property
    def size(self):
        return self.x_hat.shape[0]

    def locations(self, with_total=False):
        """Stacked query points: 2 n_PF rows, or 3 n_PF when totals are requested."""
        blocks = [self.x_hat, self.x_star]
        if with_total:
            blocks.append(self.x_star_total)
        return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class PfOutputs:
    """Vector outputs at x_hat (y) and at the frozen design (y_star), n_PF x p each."""

    y: np.ndarray
    y_star: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        y_star = np.asarray(self.y_star, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if y_star.ndim == 1:
            y_star = y_star[:, None]
        if y.shape != y_star.shape:
            raise DimensionMismatchError(f"pick-freeze outputs differ in shape: {y.shape} vs {y_star.shape}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_star", y_star)

    @property
    def size(self):
        return self.y.shape[0]

    @property
    def width(self):
        return self.y.shape[1]

    def resample(self, rows):
        """Bootstrap view: rows k_1..k_n applied jointly to y and y_star."""
        return PfOutputs(self.y[rows], self.y_star[rows])


@dataclass(frozen=True, eq=False)
class SobolMatrixEstimate:
    """Unnormalized closed (and optionally total) index matrices of the coefficients."""

    d_u: np.ndarray
    cov: np.ndarray
    f0: np.ndarray
    d_total: Optional[np.ndarray] = None

    @property
    def width(self):
        return self.cov.shape[0]
