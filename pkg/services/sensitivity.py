"""Sensitivity maps and generalized indices from coefficient-level pick-freeze matrices."""

import logging

import numpy as np

from models import DegenerateVarianceError, DimensionMismatchError, GsiValue, IndexKind, SensitivityMap
from services.pickfreeze import variance_floor

logger = logging.getLogger(__name__)


class QuadraticForms:
    """
    v_l^T M v_l for every column l of a p x m basis.

    The p (p + 1) / 2 pair products v_q v_q' are formed once, so each form costs
    p (p + 1) m flops whatever M is.
    """

    def __init__(self, components):
        self.components = np.atleast_2d(np.asarray(components, dtype=float))
        p = self.components.shape[0]
        self.rows, self.cols = np.triu_indices(p)
        self.weights = np.where(self.rows == self.cols, 1.0, 2.0)
        self.products = self.components[self.rows] * self.components[self.cols]

    def __call__(self, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        p = self.components.shape[0]
        if matrix.shape != (p, p):
            raise DimensionMismatchError(f"{matrix.shape} matrix for a basis of {p} vectors")
        symmetric = 0.5 * (matrix[self.rows, self.cols] + matrix[self.cols, self.rows])
        return (self.weights * symmetric) @ self.products


def reproject_map(estimate, components, kind=IndexKind.CLOSED, fixed_cov=None):
    """
    Per-dimension indices S_u(f_l) = v_l^T M v_l / v_l^T D v_l.

    :param estimate: SobolMatrixEstimate; M is d_u (closed) or d_total (total).
    :param components: p x m basis V, or its QuadraticForms.
    :param fixed_cov: overall covariance to use instead of the estimated one.
    :return: SensitivityMap, NaN where the denominator is below the variance floor.
    """
    kind = IndexKind(kind)
    if kind is IndexKind.TOTAL:
        if estimate.d_total is None:
            raise DimensionMismatchError("total map requested from an estimate without a total matrix")
        matrix = estimate.d_total
    else:
        matrix = estimate.d_u
    cov = estimate.cov if fixed_cov is None else fixed_cov
    forms = components if isinstance(components, QuadraticForms) else QuadraticForms(components)
    numerators = forms(matrix)
    denominators = forms(cov)
    f0 = np.asarray(estimate.f0) @ forms.components
    defined = denominators > variance_floor(f0 ** 2)
    values = np.full(numerators.shape, np.nan)
    values[defined] = numerators[defined] / denominators[defined]
    if kind is IndexKind.PLUGIN:
        values = 1.0 - values
        numerators = denominators - numerators
    return SensitivityMap(values, numerators, denominators)


def trace_product(a, b):
    """Tr(A B) as the sum of A * B^T."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"trace product needs equal square matrices, got {a.shape} and {b.shape}")
    return float(np.sum(a * b.T))


def _ratio(numerator, denominator, floor, kind):
    if not denominator > floor:
        raise DegenerateVarianceError(f"generalized index denominator {denominator:.3e} is too small")
    value = numerator / denominator
    if kind is IndexKind.PLUGIN:
        return GsiValue(1.0 - value, denominator - numerator, denominator, kind)
    return GsiValue(value, numerator, denominator, kind)


def gsi(estimate, gram, kind=IndexKind.CLOSED):
    """
    Generalized sensitivity index Tr(M G) / Tr(D G).

    For ``plugin`` the estimate must be the closed estimate of the complement and the
    result is 1 - its closed index.
    """
    kind = IndexKind(kind)
    matrix = estimate.d_total if kind is IndexKind.TOTAL else estimate.d_u
    if matrix is None:
        raise DimensionMismatchError("total index requested from an estimate without a total matrix")
    floor = variance_floor(float(estimate.f0 @ np.atleast_2d(gram) @ estimate.f0))
    return _ratio(trace_product(matrix, gram), trace_product(estimate.cov, gram), floor, kind)


def gsi_fixed_covariance(matrix, gram, fixed_cov, kind=IndexKind.CLOSED):
    """Generalized index whose denominator Tr(D G) comes from the DoE coefficients."""
    kind = IndexKind(kind)
    return _ratio(trace_product(matrix, gram), trace_product(fixed_cov, gram), variance_floor(0.0), kind)
