"""
Pick-freeze designs, Janon-Monod and Jansen estimators, bootstrap rows.

Estimators only see sums of pairwise products of the outputs, so they apply to scalar
outputs (one column) and to basis coefficients (p columns) alike.
"""

import numpy as np

from models import DegenerateVarianceError, DimensionMismatchError, InvalidDesignError, PfDesign, SobolMatrixEstimate
from services.sampling import STREAM_DESIGN, derive_seed, make_rng


def variance_floor(f0_square):
    """Degenerate-variance threshold 1e-12 max(1, f0^2)."""
    return 1e-12 * np.maximum(1.0, f0_square)


def make_pf_design(space, n_pf, index_set, seed, b=0):
    """
    Draw the pick-freeze inputs of one index set.

    X1 and X2 are independent uniform samples of the input space; x_star keeps the
    columns of u from X1, x_star_total keeps the complement from X1.

    :param seed: master seed; the stream is keyed by (index-set mask, b).
    """
    if n_pf < 2:
        raise InvalidDesignError(f"n_pf must be >= 2, got {n_pf}")
    if index_set.dims != space.dims:
        raise DimensionMismatchError(f"index set over {index_set.dims} variables for a {space.dims}-dimensional space")
    rng = make_rng(derive_seed(seed, STREAM_DESIGN, index_set.mask, b))
    first = space.scale(rng.random((n_pf, space.dims)))
    second = space.scale(rng.random((n_pf, space.dims)))
    frozen = list(index_set.members)
    x_star = second.copy()
    x_star[:, frozen] = first[:, frozen]
    x_star_total = first.copy()
    x_star_total[:, frozen] = second[:, frozen]
    return PfDesign(first, x_star, x_star_total, index_set)


def scalar_closed_pf(y, y_star):
    """
    Janon-Monod estimator of a closed Sobol index.

    :return: (S, D_u, D).
    """
    y = np.asarray(y, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if y.shape != y_star.shape or y.ndim != 1:
        raise DimensionMismatchError(f"pick-freeze samples differ in shape: {y.shape} vs {y_star.shape}")
    if y.shape[0] < 2:
        raise InvalidDesignError("pick-freeze estimation needs at least 2 samples")
    f0 = np.mean((y + y_star) / 2.0)
    d_u = np.mean(y * y_star) - f0 ** 2
    d = np.mean((y ** 2 + y_star ** 2) / 2.0) - f0 ** 2
    if d <= variance_floor(f0 ** 2):
        raise DegenerateVarianceError(f"output variance {d:.3e} is too small to normalize")
    return float(d_u / d), float(d_u), float(d)


def vector_closed_pf(outputs):
    """
    Matrix Janon-Monod estimator on p-dimensional outputs.

    :param outputs: PfOutputs with n_PF x p arrays.
    :return: SobolMatrixEstimate (d_u, symmetrized cov, f0).
    """
    y, y_star = outputs.y, outputs.y_star
    n = y.shape[0]
    if n < 2:
        raise InvalidDesignError("pick-freeze estimation needs at least 2 samples")
    f0 = (y.mean(axis=0) + y_star.mean(axis=0)) / 2.0
    centre = np.outer(f0, f0)
    d_u = y.T @ y_star / n - centre
    cov = (y.T @ y + y_star.T @ y_star) / (2.0 * n) - centre
    cov = 0.5 * (cov + cov.T)
    if np.all(np.diag(cov) <= variance_floor(f0 @ f0)):
        raise DegenerateVarianceError("every coefficient has zero estimated variance")
    return SobolMatrixEstimate(d_u, cov, f0)


def vector_total_jansen(y, y_star_total):
    """Jansen total matrix (1 / 2n) sum_k (Y_k - Y_k^-u)(Y_k - Y_k^-u)^T."""
    y = np.asarray(y, dtype=float)
    y_star_total = np.asarray(y_star_total, dtype=float)
    if y.ndim == 1:
        y, y_star_total = y[:, None], y_star_total[:, None]
    if y.shape != y_star_total.shape:
        raise DimensionMismatchError(f"pick-freeze samples differ in shape: {y.shape} vs {y_star_total.shape}")
    diff = y - y_star_total
    return diff.T @ diff / (2.0 * y.shape[0])


def plug_in_total(closed_complement):
    """Total index as 1 - closed index of the complement."""
    return 1.0 - closed_complement


def bootstrap_indices(n_pf, n_x, seed):
    """
    Row resamples for replicates b = 1..N_X-1 (replicate 0 is the identity).

    :return: (N_X - 1) x n_PF array of 0-based rows drawn uniformly with replacement.
    """
    if n_pf < 1 or n_x < 1:
        raise InvalidDesignError(f"bootstrap needs n_pf >= 1 and n_x >= 1, got {n_pf} and {n_x}")
    return make_rng(seed).integers(0, n_pf, size=(n_x - 1, n_pf))
