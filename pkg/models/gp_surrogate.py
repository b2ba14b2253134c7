from dataclasses import dataclass
from enum import Enum

import numpy as np

from models.base import BaseModel
from models.errors import DimensionMismatchError, InvalidDesignError
from models.input_space import DesignMatrix, frozen_array


class SamplingMode(Enum):
    BATCH = "batch"
    PER_TRAJECTORY = "per-trajectory"


@dataclass(frozen=True, eq=False)
class KernelParams(BaseModel):
    """Anisotropic Matern 5/2 hyperparameters; the nugget is an absolute variance."""

    lengthscales: np.ndarray
    signal_variance: float
    nugget: float = 0.0

    def __post_init__(self):
        lengthscales = frozen_array(np.atleast_1d(self.lengthscales), ndim=1, name="lengthscales")
        if np.any(lengthscales <= 0) or not np.all(np.isfinite(lengthscales)):
            raise InvalidDesignError("lengthscales must be finite and strictly positive")
        if not self.signal_variance > 0:
            raise InvalidDesignError(f"signal variance must be positive, got {self.signal_variance}")
        if self.nugget < 0:
            raise InvalidDesignError(f"nugget must be non-negative, got {self.nugget}")
        object.__setattr__(self, "lengthscales", lengthscales)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "nugget", float(self.nugget))

    @property
    def dims(self):
        return self.lengthscales.shape[0]


@dataclass(frozen=True, eq=False)
class GpSurrogate:
    """Zero-mean GP conditioned on (design, targets)."""

    params: KernelParams
    design: DesignMatrix
    chol: np.ndarray
    alpha: np.ndarray
    train_targets: np.ndarray
    log_likelihood: float = float("nan")
    jitter: float = 0.0

    def __post_init__(self):
        if self.params.dims != self.design.space.dims:
            raise DimensionMismatchError(
                f"{self.params.dims} lengthscales for a {self.design.space.dims}-dimensional design"
            )
        for name in ("chol", "alpha", "train_targets"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), name=name))


@dataclass(frozen=True, eq=False)
class VectorGp:
    """Independent GPs, one per basis coefficient, sharing one design."""

    surrogates: tuple

    def __post_init__(self):
        surrogates = tuple(self.surrogates)
        if not surrogates:
            raise InvalidDesignError("a vector GP needs at least one coefficient surrogate")
        first = surrogates[0].design
        for surrogate in surrogates[1:]:
            if surrogate.design is not first and not np.array_equal(surrogate.design.points, first.points):
                raise DimensionMismatchError("all coefficient surrogates must share the same design")
        object.__setattr__(self, "surrogates", surrogates)

    def __len__(self):
        return len(self.surrogates)

    def __iter__(self):
        return iter(self.surrogates)

    def __getitem__(self, q):
        return self.surrogates[q]

    @property
    def design(self):
        return self.surrogates[0].design

    @property
    def n_outputs(self):
        return len(self.surrogates)


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    """N_Z x L x p conditional GP draws at L query locations."""

    values: np.ndarray
    seed: int
    mode: SamplingMode = SamplingMode.BATCH

    def __post_init__(self):
        values = frozen_array(self.values, ndim=3, name="trajectories")
        object.__setattr__(self, "values", values)

    @property
    def n_trajectories(self):
        return self.values.shape[0]

    @property
    def n_locations(self):
        return self.values.shape[1]

    @property
    def n_outputs(self):
        return self.values.shape[2]

    def trajectory(self, j):
        return self.values[j]


@dataclass(frozen=True)
class GpOptions(BaseModel):
    """Maximum-likelihood search settings."""

    starts: int = 8
    max_iter: int = 200
    lengthscale_bounds: tuple = (1e-3, 1e3)
    nugget_bounds: tuple = (1e-10, 1e-2)
    variance_bounds: tuple = (1e-4, 1e3)
    start_seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise InvalidDesignError(f"at least one optimizer start is required, got {self.starts}")
        if self.max_iter < 1:
            raise InvalidDesignError(f"max_iter must be positive, got {self.max_iter}")
        object.__setattr__(self, "lengthscale_bounds", tuple(float(v) for v in self.lengthscale_bounds))
        object.__setattr__(self, "nugget_bounds", tuple(float(v) for v in self.nugget_bounds))
        object.__setattr__(self, "variance_bounds", tuple(float(v) for v in self.variance_bounds))
