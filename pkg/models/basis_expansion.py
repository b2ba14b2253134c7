from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from models.base import BaseModel
from models.errors import DimensionMismatchError
from models.input_space import frozen_array


@dataclass(frozen=True, eq=False)
class BasisExpansion(BaseModel):
    """Truncated linear expansion f(x) ~ mean + a(x)^T V of functional outputs."""

    mean: np.ndarray
    components: np.ndarray
    coefficients: np.ndarray
    explained_ratio: float = 1.0
    total_energy: float = float("nan")
    grid: Optional[np.ndarray] = None
    _gram: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        mean = frozen_array(self.mean, ndim=1, name="mean")
        components = frozen_array(self.components, ndim=2, name="components")
        coefficients = frozen_array(self.coefficients, ndim=2, name="coefficients")
        if components.shape[1] != mean.shape[0]:
            raise DimensionMismatchError(f"components have width {components.shape[1]} but mean has {mean.shape[0]}")
        if coefficients.shape[1] != components.shape[0]:
            raise DimensionMismatchError(
                f"coefficients have {coefficients.shape[1]} columns for {components.shape[0]} basis vectors"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "coefficients", coefficients)
        if self.grid is not None:
            object.__setattr__(self, "grid", frozen_array(self.grid, ndim=1, name="grid"))

    @property
    def n_components(self):
        return self.components.shape[0]

    @property
    def width(self):
        return self.components.shape[1]

    @property
    def gram(self):
        """Gram matrix G = V V^T, computed once."""
        if self._gram is None:
            gram = self.components @ self.components.T
            gram = 0.5 * (gram + gram.T)
            gram.setflags(write=False)
            object.__setattr__(self, "_gram", gram)
        return self._gram

    @property
    def discarded_energy(self):
        """Squared reconstruction error of the training data left by the truncation."""
        return self.total_energy * (1.0 - self.explained_ratio)

    @property
    def is_orthonormal(self):
        return bool(np.max(np.abs(self.gram - np.eye(self.n_components))) <= 1e-10)


@dataclass(frozen=True)
class BasisCriterion:
    """Truncation rule: a fixed number of components, or a variance threshold."""

    components: Optional[int] = None
    threshold: Optional[float] = 0.99

    @classmethod
    def fixed(cls, p):
        return cls(components=int(p), threshold=None)

    @classmethod
    def variance(cls, tau=0.99):
        return cls(components=None, threshold=float(tau))
