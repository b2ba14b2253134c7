"""Q2 (Nash-Sutcliffe) assessment of the surrogate on held-out outputs."""

import logging
import warnings

import numpy as np

from models import DimensionMismatchError, InvalidDesignError, Q2Report, SamplingMode, UndefinedQ2Error
from services.gp import sample_trajectories
from services.sampling import STREAM_VALIDATION

logger = logging.getLogger(__name__)


def q2(predicted, observed):
    """1 - sum (obs - pred)^2 / sum (obs - mean(obs))^2."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if predicted.shape != observed.shape or observed.ndim != 1:
        raise DimensionMismatchError(f"predictions {predicted.shape} do not match observations {observed.shape}")
    if observed.size < 2:
        raise InvalidDesignError("Q2 needs at least 2 validation points")
    sst = np.sum((observed - observed.mean()) ** 2)
    if not sst > 0.0:
        raise UndefinedQ2Error("observed values are constant, Q2 is undefined")
    return float(1.0 - np.sum((observed - predicted) ** 2) / sst)


def _q2_columns(predicted, observed):
    sst = np.sum((observed - observed.mean(axis=0)) ** 2, axis=0)
    sse = np.sum((observed - predicted) ** 2, axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sst > 0.0, 1.0 - sse / sst, np.nan)


def q2_trajectory_report(vgp, basis, design, outputs, n_z, seed, mode=SamplingMode.BATCH):
    """
    Q2 of every output dimension for N_Z conditional trajectories.

    Trajectories of the coefficients at the validation points are reconstructed through
    the basis; constant observed dimensions are reported as NaN.

    :param design: validation DesignMatrix (disjoint from the training design).
    :param outputs: FunctionalOutputs observed at the validation points.
    :return: Q2Report with an N_Z x m value array and p5/p50/p95 curves.
    """
    outputs.check_rows(design)
    if outputs.width != basis.width:
        raise DimensionMismatchError(f"validation outputs have width {outputs.width}, basis expects {basis.width}")
    if design.size < 2:
        raise InvalidDesignError("Q2 needs at least 2 validation points")
    batch = sample_trajectories(vgp, design.points, n_z, mode, seed, (STREAM_VALIDATION,))
    predicted = basis.mean + batch.values @ basis.components
    values = _q2_columns(predicted, outputs.values)
    constant = int(np.sum(np.all(np.isnan(values), axis=0)))
    if constant:
        logger.warning("%d output dimensions are constant on the validation set, Q2 undefined", constant)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        p5, p50, p95 = np.nanpercentile(values, [5, 50, 95], axis=0)
        logger.info("median Q2 over dimensions: %.4f", np.nanmedian(p50))
    return Q2Report(values, p5, p50, p95, outputs.grid)
