from .errors import (
    SensimapError,
    ConfigError,
    InvalidDesignError,
    DimensionMismatchError,
    DataFormatError,
    NumericalError,
    DegenerateDataError,
    DegenerateVarianceError,
    IllConditionedKernelError,
    UndefinedQ2Error,
    EmptySummaryError,
)
from .base import BaseModel
from .input_space import InputSpace, DesignMatrix
from .outputs import FunctionalOutputs
from .test_model import TestModel, TestModelKind
from .basis_expansion import BasisExpansion, BasisCriterion
from .gp_surrogate import KernelParams, GpSurrogate, VectorGp, TrajectoryBatch, SamplingMode, GpOptions
from .pick_freeze import IndexSet, PfDesign, PfOutputs, SobolMatrixEstimate
from .sensitivity import SensitivityMap, GsiValue, IndexKind
from .run_config import RunConfig, CovarianceMode
from .distribution import IndexDistribution, BoxplotSummary, Attribution, Q2Report, SummaryScope
from .pipeline_config import PipelineConfig, BenchOptions
