"""Matern 5/2 covariance with per-dimension lengthscales."""

import numpy as np

SQRT5 = np.sqrt(5.0)


def scaled_distance(a, b, lengthscales):
    """Matrix of r = sqrt(sum_i ((a_i - b_i) / theta_i)^2)."""
    a = np.atleast_2d(np.asarray(a, dtype=float)) / lengthscales
    b = np.atleast_2d(np.asarray(b, dtype=float)) / lengthscales
    sq = np.sum(a ** 2, axis=1)[:, None] + np.sum(b ** 2, axis=1)[None, :] - 2.0 * a @ b.T
    return np.sqrt(np.maximum(sq, 0.0))


def matern52(x, x_prime, params):
    """sigma^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r) between two points."""
    diff = (np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)) / params.lengthscales
    r = float(np.sqrt(np.sum(diff ** 2)))
    return float(params.signal_variance * (1.0 + SQRT5 * r + 5.0 * r ** 2 / 3.0) * np.exp(-SQRT5 * r))


def _matern_from_distance(r, variance):
    return variance * (1.0 + SQRT5 * r + (5.0 / 3.0) * r ** 2) * np.exp(-SQRT5 * r)


def coincident_pairs(a, b):
    """Index arrays (ia, ib) of exactly equal rows of a and b."""
    a = np.ascontiguousarray(np.atleast_2d(a), dtype=float)
    b = np.ascontiguousarray(np.atleast_2d(b), dtype=float)
    lookup = {}
    for j, row in enumerate(b):
        lookup.setdefault(row.tobytes(), []).append(j)
    ia, ib = [], []
    for i, row in enumerate(a):
        for j in lookup.get(row.tobytes(), ()):
            ia.append(i)
            ib.append(j)
    return np.asarray(ia, dtype=int), np.asarray(ib, dtype=int)


def covariance_matrix(a, b, params, same=False):
    """
    Matern 5/2 covariance plus the nugget.

    Within one point set (``same``) the nugget sits on the diagonal only, so duplicated
    rows keep independent noise. Between two sets it is added wherever a row of a equals
    a row of b.

    :param same: a and b are the same point set.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = a if same else np.atleast_2d(np.asarray(b, dtype=float))
    if same and a.shape[0] <= 512:
        diff = (a[:, None, :] - a[None, :, :]) / params.lengthscales
        r = np.sqrt(np.sum(diff ** 2, axis=2))
    else:
        r = scaled_distance(a, b, params.lengthscales)
    k = _matern_from_distance(r, params.signal_variance)
    if same:
        k = 0.5 * (k + k.T)
        k[np.diag_indices_from(k)] = params.signal_variance + params.nugget
        return k
    ia, ib = coincident_pairs(a, b)
    k[ia, ib] = params.signal_variance + params.nugget
    return k


def covariance_gradients(points, params):
    """
    Derivatives of K(D, D) with respect to (log theta_1..d, log sigma^2, log(nugget / sigma^2)).

    :return: list of d + 2 matrices.
    """
    points = np.atleast_2d(points)
    diff = (points[:, None, :] - points[None, :, :]) / params.lengthscales
    sq = diff ** 2
    r = np.sqrt(np.sum(sq, axis=2))
    decay = params.signal_variance * np.exp(-SQRT5 * r)
    # dk/dlog(theta_i) = sigma^2 (5/3)(1 + sqrt5 r) exp(-sqrt5 r) ((x_i - x'_i) / theta_i)^2
    common = (5.0 / 3.0) * (1.0 + SQRT5 * r) * decay
    grads = [common * sq[:, :, i] for i in range(points.shape[1])]
    white = params.nugget * np.eye(points.shape[0])
    grads.append(_matern_from_distance(r, params.signal_variance) + white)
    grads.append(white)
    return grads
