from dataclasses import dataclass, field
from enum import Enum

from models.base import BaseModel
from models.errors import ConfigError
from models.gp_surrogate import SamplingMode
from models.sensitivity import IndexKind


class CovarianceMode(Enum):
    EMPIRICAL = "empirical"
    FIXED = "fixed"


@dataclass(frozen=True)
class RunConfig(BaseModel):
    """Loop sizes and modes of the error-quantification algorithms."""

    n_pf: int = 1000
    n_z: int = 50
    n_x: int = 20
    kinds: tuple = (IndexKind.CLOSED,)
    mode: SamplingMode = SamplingMode.BATCH
    covariance: CovarianceMode = CovarianceMode.EMPIRICAL
    seed: int = 0
    threads: int = 1
    variables: tuple = field(default=())

    def __post_init__(self):
        if self.n_pf < 2:
            raise ConfigError(f"n_pf must be >= 2, got {self.n_pf}")
        if self.n_z < 1:
            raise ConfigError(f"n_z must be >= 1, got {self.n_z}")
        if self.n_x < 1:
            raise ConfigError(f"n_x must be >= 1, got {self.n_x}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        kinds = tuple(IndexKind(kind) if not isinstance(kind, IndexKind) else kind for kind in self.kinds)
        if not kinds:
            raise ConfigError("at least one index kind is required")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "mode", SamplingMode(self.mode))
        object.__setattr__(self, "covariance", CovarianceMode(self.covariance))

    @property
    def needs_total_locations(self):
        return IndexKind.TOTAL in self.kinds or IndexKind.PLUGIN in self.kinds

    def to_dict(self):
        record = super().to_dict()
        record["kinds"] = [kind.value for kind in self.kinds]
        return record
