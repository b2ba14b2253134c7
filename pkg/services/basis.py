"""PCA basis expansion of functional outputs."""

import logging

import numpy as np
from scipy import linalg

from models import (
    BasisCriterion,
    BasisExpansion,
    DegenerateDataError,
    DimensionMismatchError,
    FunctionalOutputs,
    InvalidDesignError,
)

logger = logging.getLogger(__name__)


def _choose_components(energy, criterion, limit):
    ratios = np.cumsum(energy) / energy.sum()
    if criterion.components is not None:
        p = int(criterion.components)
        if p < 1 or p > limit:
            raise InvalidDesignError(f"the number of components must lie in [1, {limit}], got {p}")
        return p
    tau = float(criterion.threshold)
    if not 0.0 < tau <= 1.0:
        raise InvalidDesignError(f"variance threshold must lie in (0, 1], got {tau}")
    # relative slack so that tau = 1 selects the full rank instead of overshooting on round-off
    reached = np.nonzero(ratios >= tau - 1e-12)[0]
    return min(int(reached[0]) + 1 if reached.size else limit, limit)


def fit_pca(outputs, criterion=None):
    """
    Fit a truncated PCA basis on functional outputs.

    Components are the orthonormal right singular vectors of the centered data, so that
    G = I_p; the variance is carried by the coefficients.

    :param outputs: FunctionalOutputs, n >= 2 rows.
    :param criterion: BasisCriterion (default: 99% explained variance).
    :return: BasisExpansion.
    """
    criterion = criterion or BasisCriterion.variance()
    values = outputs.values
    n, m = values.shape
    if n < 2:
        raise InvalidDesignError(f"PCA needs at least 2 output rows, got {n}")

    mean = values.mean(axis=0)
    centered = values - mean
    _, singular, vt = linalg.svd(centered, full_matrices=False)
    energy = singular ** 2
    total = energy.sum()
    if not total > 1e-300 or singular[0] <= 1e-12 * max(1.0, float(np.abs(values).max())):
        raise DegenerateDataError("outputs have zero total variance, no basis can be fitted")

    p = _choose_components(energy, criterion, min(n, m))
    components = vt[:p]
    coefficients = centered @ components.T
    explained = float(energy[:p].sum() / total)
    logger.info("PCA basis: p=%d of %d possible components, explained variance %.6f", p, min(n, m), explained)
    return BasisExpansion(mean, components, coefficients, explained, float(total), outputs.grid)


def gram(expansion):
    """G = V V^T of the basis."""
    return expansion.gram


def project(expansion, outputs):
    """
    Coefficients of outputs in the basis.

    Orthonormal bases reduce to (f - mean) V^T; general bases solve the least-squares
    problem min ||(f - mean) - a V|| (pseudo-inverse of G when it is singular).
    """
    values = outputs.values if isinstance(outputs, FunctionalOutputs) else np.atleast_2d(np.asarray(outputs, dtype=float))
    if values.shape[1] != expansion.width:
        raise DimensionMismatchError(f"outputs have width {values.shape[1]}, basis expects {expansion.width}")
    centered = values - expansion.mean
    if expansion.is_orthonormal:
        return centered @ expansion.components.T
    coefficients, *_ = linalg.lstsq(expansion.components.T, centered.T)
    return coefficients.T


def reconstruct(expansion, coefficients):
    """mean + coefficients V, as FunctionalOutputs."""
    coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
    if coefficients.shape[1] != expansion.n_components:
        raise DimensionMismatchError(
            f"coefficients have width {coefficients.shape[1]}, basis has {expansion.n_components} components"
        )
    return FunctionalOutputs(expansion.mean + coefficients @ expansion.components, expansion.grid)


def coefficient_covariance(expansion, coefficients=None):
    """Population covariance of the DoE coefficients (the fixed overall covariance)."""
    coefficients = expansion.coefficients if coefficients is None else np.asarray(coefficients, dtype=float)
    return np.atleast_2d(np.cov(coefficients, rowvar=False, bias=True))
