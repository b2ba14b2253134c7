"""
Conditional Gaussian processes on basis coefficients.

Each coefficient gets an independent zero-mean GP with an anisotropic Matern 5/2
kernel whose hyperparameters maximize the log marginal likelihood. Conditional
trajectories are drawn with a Cholesky factor of the conditional covariance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import linalg, optimize
from scipy.stats import qmc

from models import (
    DimensionMismatchError,
    GpOptions,
    GpSurrogate,
    IllConditionedKernelError,
    InvalidDesignError,
    KernelParams,
    SamplingMode,
    TrajectoryBatch,
    VectorGp,
)
from services.kernels import covariance_gradients, covariance_matrix
from services.sampling import STREAM_TRAJECTORY, derive_seed

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-4
PENALTY = 1e25


def stable_cholesky(matrix, scale, initial_jitter=None):
    """
    Lower Cholesky factor of ``matrix + jitter I``.

    The jitter starts at ``initial_jitter`` (0 by default, then 1e-10 scale) and doubles
    up to 1e-4 scale.

    :return: (factor, jitter actually used).
    """
    scale = float(scale) if scale > 0 else 1.0
    jitter = 0.0 if initial_jitter is None else float(initial_jitter)
    diagonal = np.diagonal(matrix).copy()
    work = np.empty_like(matrix, dtype=float)
    while True:
        np.copyto(work, matrix)
        if jitter:
            np.fill_diagonal(work, diagonal + jitter)
        try:
            factor = linalg.cholesky(work, lower=True, overwrite_a=True, check_finite=False)
            if jitter:
                logger.debug("Cholesky succeeded with jitter %.3e", jitter)
            return factor, jitter
        except linalg.LinAlgError:
            jitter = JITTER_START * scale if jitter == 0.0 else 2.0 * jitter
            if jitter > JITTER_MAX * scale * (1.0 + 1e-12):
                raise IllConditionedKernelError(
                    f"covariance matrix of size {matrix.shape[0]} is not positive definite even with jitter "
                    f"{JITTER_MAX * scale:.3e}"
                ) from None


def _unpack(log_params, dims):
    lengthscales = np.exp(log_params[:dims])
    variance = float(np.exp(log_params[dims]))
    nugget = variance * float(np.exp(log_params[dims + 1]))
    return KernelParams(lengthscales, variance, nugget)


def log_marginal_likelihood(log_params, points, targets, return_grad=False):
    """
    Log marginal likelihood -1/2 y^T K^-1 y - 1/2 log det K - n/2 log 2 pi.

    :param log_params: (log theta_1..d, log sigma^2, log(nugget / sigma^2)).
    :param return_grad: also return the gradient with respect to log_params.
    """
    points = np.atleast_2d(points)
    targets = np.asarray(targets, dtype=float)
    n, dims = points.shape
    params = _unpack(np.asarray(log_params, dtype=float), dims)
    k = covariance_matrix(points, points, params, same=True)
    factor, _ = stable_cholesky(k, params.signal_variance)
    alpha = linalg.cho_solve((factor, True), targets, check_finite=False)
    value = -0.5 * targets @ alpha - np.sum(np.log(np.diag(factor))) - 0.5 * n * np.log(2.0 * np.pi)
    if not return_grad:
        return float(value)
    inner = np.outer(alpha, alpha) - linalg.cho_solve((factor, True), np.eye(n), check_finite=False)
    grad = np.array([0.5 * np.sum(inner * dk) for dk in covariance_gradients(points, params)])
    return float(value), grad


def _bounds(design, targets, options):
    ranges = design.space.ranges
    low_l, high_l = options.lengthscale_bounds
    scale = max(float(np.mean(targets ** 2)), 1e-12)
    low_v, high_v = options.variance_bounds
    low_n, high_n = options.nugget_bounds
    bounds = [(np.log(low_l * r), np.log(high_l * r)) for r in ranges]
    bounds.append((np.log(low_v * scale), np.log(high_v * scale)))
    bounds.append((np.log(low_n), np.log(high_n)))
    return np.array(bounds)


def _start_points(bounds, options):
    """Deterministic Latin grid of starts, restricted to the central half of each log-range."""
    sampler = qmc.LatinHypercube(d=bounds.shape[0], scramble=True, seed=options.start_seed)
    unit = 0.25 + 0.5 * sampler.random(options.starts)
    return bounds[:, 0] + unit * (bounds[:, 1] - bounds[:, 0])


def condition(params, design, targets, log_likelihood=float("nan")):
    """Build the conditional GP for fixed hyperparameters."""
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (design.size,):
        raise DimensionMismatchError(f"{targets.shape[0]} targets for a design of {design.size} points")
    k = covariance_matrix(design.points, design.points, params, same=True)
    factor, jitter = stable_cholesky(k, params.signal_variance)
    alpha = linalg.cho_solve((factor, True), targets, check_finite=False)
    return GpSurrogate(params, design, factor, alpha, targets, float(log_likelihood), jitter)


def fit_gp(design, targets, options=None):
    """
    Fit one GP by multi-start maximum likelihood.

    :param design: DesignMatrix, n >= 2.
    :param targets: n finite values.
    :param options: GpOptions.
    :return: GpSurrogate at the best hyperparameters found.
    """
    options = options or GpOptions()
    targets = np.asarray(targets, dtype=float)
    if design.size < 2:
        raise InvalidDesignError(f"a GP needs at least 2 design points, got {design.size}")
    if targets.shape != (design.size,) or not np.all(np.isfinite(targets)):
        raise InvalidDesignError("targets must be finite and match the design size")

    bounds = _bounds(design, targets, options)
    points = design.points

    def objective(log_params):
        try:
            value, grad = log_marginal_likelihood(log_params, points, targets, return_grad=True)
        except IllConditionedKernelError:
            return PENALTY, np.zeros_like(log_params)
        return -value, -grad

    best_x, best_value = None, -np.inf
    for start in _start_points(bounds, options):
        start_value = -objective(start)[0]
        if start_value > best_value:
            best_x, best_value = start, start_value
        result = optimize.minimize(
            objective, start, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": options.max_iter}
        )
        value = -float(result.fun)
        logger.debug("start %s -> log likelihood %.6g (%s)", np.round(start, 3), value, result.message)
        if np.isfinite(value) and value > best_value and value > -PENALTY:
            best_x, best_value = np.clip(result.x, bounds[:, 0], bounds[:, 1]), value

    if best_x is None or best_value <= -PENALTY:
        raise IllConditionedKernelError("no hyperparameters gave a positive definite kernel matrix")
    at_bound = np.isclose(best_x, bounds[:, 0]) | np.isclose(best_x, bounds[:, 1])
    if np.any(at_bound[:-1]):
        logger.warning("hyperparameters %s reached a bound", np.nonzero(at_bound[:-1])[0].tolist())
    params = _unpack(best_x, design.space.dims)
    return condition(params, design, targets, best_value)


def fit_vector_gp(design, coefficients, options=None, threads=1):
    """One independent GP per coefficient column, returned in column order."""
    coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
    if coefficients.shape[0] != design.size:
        raise DimensionMismatchError(f"{coefficients.shape[0]} coefficient rows for a design of {design.size} points")
    columns = [coefficients[:, q] for q in range(coefficients.shape[1])]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            surrogates = list(pool.map(lambda y: fit_gp(design, y, options), columns))
    else:
        surrogates = [fit_gp(design, y, options) for y in columns]
    for q, surrogate in enumerate(surrogates):
        logger.info(
            "GP %d: lengthscales %s, variance %.4g, nugget %.3g, log likelihood %.6g",
            q + 1,
            np.array2string(surrogate.params.lengthscales, precision=4),
            surrogate.params.signal_variance,
            surrogate.params.nugget,
            surrogate.log_likelihood,
        )
    return VectorGp(tuple(surrogates))


def conditional_moments(gp, query):
    """
    Kriging mean k(x)^T K^-1 y and covariance K(Q, Q) - k(Q, D) K^-1 k(D, Q).

    :return: (mean L-vector, symmetric L x L covariance with non-negative diagonal).
    """
    query = np.atleast_2d(np.asarray(query, dtype=float))
    if query.shape[1] != gp.params.dims:
        raise DimensionMismatchError(f"query has {query.shape[1]} columns, GP expects {gp.params.dims}")
    if not np.all(np.isfinite(query)):
        raise InvalidDesignError("query points must be finite")
    cross = covariance_matrix(query, gp.design.points, gp.params)
    mean = cross @ gp.alpha
    solved = linalg.solve_triangular(gp.chol, cross.T, lower=True, check_finite=False)
    cov = covariance_matrix(query, query, gp.params, same=True) - solved.T @ solved
    cov = 0.5 * (cov + cov.T)
    diag = np.einsum("ii->i", cov)
    np.maximum(diag, 0.0, out=diag)
    return mean, cov


def _trajectory_noise(seed, stream, q, j, size):
    rng = np.random.default_rng(derive_seed(seed, *stream, q, j))
    return rng.standard_normal(size)


def _factorize(gp, query):
    mean, cov = conditional_moments(gp, query)
    factor, _ = stable_cholesky(cov, gp.params.signal_variance, initial_jitter=JITTER_START * gp.params.signal_variance)
    return mean, factor


def iter_trajectories(vgp, query, n_z, mode=SamplingMode.BATCH, seed=0, stream=(STREAM_TRAJECTORY,)):
    """
    Yield (j, L x p trajectory) for j = 0..n_z-1.

    Trajectory j of coefficient q is mean_q + chol_q eps_{q,j} with eps drawn from the
    seed derived from (seed, *stream, q, j). ``batch`` factorizes every conditional
    covariance once; ``per-trajectory`` refactorizes for every draw and keeps only one
    trajectory in memory. Both yield identical arrays.
    """
    mode = SamplingMode(mode)
    query = np.atleast_2d(np.asarray(query, dtype=float))
    if query.shape[0] < 1 or n_z < 1:
        raise InvalidDesignError("trajectory sampling needs L >= 1 locations and N_Z >= 1 draws")
    size = query.shape[0]
    if mode is SamplingMode.BATCH:
        values = np.empty((n_z, size, len(vgp)))
        for q, gp in enumerate(vgp):
            mean, factor = _factorize(gp, query)
            for j in range(n_z):
                values[j, :, q] = mean + factor @ _trajectory_noise(seed, stream, q, j, size)
            del factor
        for j in range(n_z):
            yield j, values[j]
        return
    for j in range(n_z):
        yield j, sample_trajectory(vgp, query, j, seed, stream)


def sample_trajectories(vgp, query, n_z, mode=SamplingMode.BATCH, seed=0, stream=(STREAM_TRAJECTORY,)):
    """Collect ``iter_trajectories`` into an N_Z x L x p TrajectoryBatch."""
    values = np.stack([trajectory for _, trajectory in iter_trajectories(vgp, query, n_z, mode, seed, stream)])
    return TrajectoryBatch(values, int(seed), SamplingMode(mode))


def sample_trajectory(vgp, query, j, seed=0, stream=(STREAM_TRAJECTORY,)):
    """Trajectory j alone, refactorizing every conditional covariance."""
    query = np.atleast_2d(np.asarray(query, dtype=float))
    trajectory = np.empty((query.shape[0], len(vgp)))
    for q, gp in enumerate(vgp):
        mean, factor = _factorize(gp, query)
        trajectory[:, q] = mean + factor @ _trajectory_noise(seed, stream, q, j, query.shape[0])
    return trajectory
