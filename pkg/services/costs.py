"""Flop model of dimension-wise against basis-derived estimation, and a tally of the flops actually spent."""

import threading
from collections import Counter

from models import InvalidDesignError

BASIS_DERIVED = "basis_derived"
DIMENSIONWISE = "dimensionwise"


def harmonic_mean(a, b):
    return 2.0 * a * b / (a + b)


def predicted_costs(p, n_pf, m):
    """
    Operation counts of one (trajectory, replicate) estimate.

    cost_dw = 4 (p + 2) n_PF m
    cost_bd = 2 p (3 p + 1) n_PF + 3 p (p + 1) m

    :return: (cost_dw, cost_bd, lower bound H(2 n_PF, m) / (3 p) of cost_dw / cost_bd).
    """
    for name, value in (("p", p), ("n_pf", n_pf), ("m", m)):
        if int(value) != value or value < 1:
            raise InvalidDesignError(f"{name} must be a positive integer, got {value}")
    p, n_pf, m = int(p), int(n_pf), int(m)
    cost_dw = 4 * (p + 2) * n_pf * m
    cost_bd = 2 * p * (3 * p + 1) * n_pf + 3 * p * (p + 1) * m
    return cost_dw, cost_bd, harmonic_mean(2 * n_pf, m) / (3 * p)


class OperationCounter:
    """
    Thread-safe flop tally per estimation path.

    The estimators report every executed call with the shapes it ran on; variance-floor
    guards and comparisons are not counted.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._counts = Counter()
        self._replicates = Counter()

    def add(self, path, flops):
        with self._lock:
            self._counts[path] += int(flops)

    def replicate(self, path):
        with self._lock:
            self._replicates[path] += 1

    def total(self, path):
        return self._counts[path]

    def per_replicate(self, path):
        """Mean flops of one (trajectory, replicate) estimate."""
        count = self._replicates[path]
        return self._counts[path] / count if count else 0.0

    def ratio(self, numerator=DIMENSIONWISE, denominator=BASIS_DERIVED):
        return self.per_replicate(numerator) / self.per_replicate(denominator)


def matmul_flops(rows, inner, cols):
    return 2 * rows * inner * cols


def closed_matrix_flops(n, p):
    """Column means, the three p x p Gram products and their p x p arithmetic in one closed estimate."""
    return 2 * n * p + 2 * p + 3 * matmul_flops(p, n, p) + 8 * p * p


def jansen_flops(n, p):
    return n * p + matmul_flops(p, n, p) + p * p


def quadratic_form_flops(p, m):
    """Symmetrized upper triangle, its weighting and the product with the pair products."""
    pairs = p * (p + 1) // 2
    return 3 * pairs + 2 * pairs * m


def map_flops(p, m, plugin=False):
    return 2 * quadratic_form_flops(p, m) + m + (2 * m if plugin else 0)


def gsi_flops(p, plugin=False):
    return 2 * 2 * p * p + 1 + (2 if plugin else 0)


def column_closed_flops(n, m):
    """Scalar closed estimator applied to m output columns of n samples."""
    return 9 * n * m + 6 * m


def column_total_flops(n, m):
    return 3 * n * m + m
