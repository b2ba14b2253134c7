from dataclasses import dataclass, field
from typing import Optional

from models.base import BaseModel
from models.basis_expansion import BasisCriterion
from models.errors import ConfigError
from models.gp_surrogate import GpOptions
from models.input_space import InputSpace
from models.run_config import RunConfig
from models.test_model import TestModel


@dataclass(frozen=True)
class BenchOptions(BaseModel):
    """Synthetic workload of the benchmark command."""

    grid_size: int = 4096
    components: int = 10
    n_pf: int = 1000
    n_z: int = 10
    n_x: int = 10


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """Resolved pipeline configuration: data source, basis, surrogates and analysis settings."""

    space: InputSpace
    run: RunConfig
    source: str = "model"
    model: Optional[TestModel] = None
    design_method: str = "lhs"
    n: int = 100
    doe_path: Optional[str] = None
    outputs_path: Optional[str] = None
    outputs_header: Optional[bool] = None
    criterion: BasisCriterion = field(default_factory=BasisCriterion)
    gp: GpOptions = field(default_factory=GpOptions)
    output_dir: str = "results"
    memory_budget_mb: float = 2048.0
    doe_sizes: tuple = ()
    n_pf_values: tuple = ()
    validation_count: Optional[int] = None
    validation_indices: tuple = ()
    validation_training: tuple = ()
    validation_n_z: int = 100
    surrogates_dir: Optional[str] = None
    bench: BenchOptions = field(default_factory=BenchOptions)
    version: int = 1
    path: Optional[str] = None

    def __post_init__(self):
        if self.source not in ("model", "csv"):
            raise ConfigError(f"unknown data source '{self.source}', expected 'model' or 'csv'", self.path)
        if self.source == "model" and self.model is None:
            raise ConfigError("data source 'model' needs a model", self.path)
        if self.source == "csv" and (self.doe_path is None or self.outputs_path is None):
            raise ConfigError("data source 'csv' needs both doe and outputs files", self.path)

    @property
    def index_sets(self):
        return self.run.variables

    def replace(self, **changes):
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return PipelineConfig(**values)

    def to_dict(self):
        return {
            "version": self.version,
            "space": {"names": list(self.space.names), "bounds": self.space.bounds.tolist()},
            "source": self.source,
            "model": None if self.model is None else self.model.to_dict(),
            "design_method": self.design_method,
            "n": self.n,
            "doe_path": self.doe_path,
            "outputs_path": self.outputs_path,
            "outputs_header": self.outputs_header,
            "basis": {"components": self.criterion.components, "threshold": self.criterion.threshold},
            "gp": self.gp.to_dict(),
            "analysis": self.run.to_dict(),
            "memory_budget_mb": self.memory_budget_mb,
            "sweep": {"doe_sizes": list(self.doe_sizes), "n_pf_values": list(self.n_pf_values)},
            "validation": {
                "count": self.validation_count,
                "indices": list(self.validation_indices),
                "training": list(self.validation_training),
                "n_z": self.validation_n_z,
            },
            "surrogates_dir": self.surrogates_dir,
            "bench": self.bench.to_dict(),
        }
