"""
Joint quantification of metamodeling and pick-freeze estimation errors.

Replicate b = 0 of every trajectory uses the pick-freeze sample as drawn and carries
the metamodeling error alone; replicates 1..N_X-1 resample its rows, afresh for every
trajectory.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from models import (
    CovarianceMode,
    DegenerateVarianceError,
    DimensionMismatchError,
    IndexDistribution,
    IndexKind,
    NumericalError,
    PfOutputs,
    SamplingMode,
    SobolMatrixEstimate,
)
from services.basis import coefficient_covariance
from services.costs import (
    BASIS_DERIVED,
    DIMENSIONWISE,
    OperationCounter,
    closed_matrix_flops,
    column_closed_flops,
    column_total_flops,
    gsi_flops,
    jansen_flops,
    map_flops,
    matmul_flops,
)
from services.gp import iter_trajectories, sample_trajectories, sample_trajectory
from services.pickfreeze import bootstrap_indices, make_pf_design, variance_floor, vector_closed_pf, vector_total_jansen
from services.sampling import STREAM_BOOTSTRAP, STREAM_TRAJECTORY, derive_seed
from services.sensitivity import QuadraticForms, gsi, gsi_fixed_covariance, reproject_map

logger = logging.getLogger(__name__)


def batch_memory_mb(p, n_z, locations):
    """Storage of a batch of N_Z trajectories at L locations, in MiB."""
    return 8.0 * p * n_z * locations / 2 ** 20


def trajectory_bootstrap(n_pf, n_x, seed, *keys):
    """
    Bootstrap rows of trajectory j, seeded from (seed, 2, *keys, j).

    :return: callable j -> (N_X - 1) x n_PF rows.
    """

    def rows(j):
        return bootstrap_indices(n_pf, n_x, derive_seed(seed, STREAM_BOOTSTRAP, *keys, j))

    return rows


def _split(trajectory, n_pf, with_total):
    y = trajectory[:n_pf]
    y_star = trajectory[n_pf:2 * n_pf]
    y_total = trajectory[2 * n_pf:3 * n_pf] if with_total else None
    if y_star.shape[0] != n_pf or (with_total and y_total.shape[0] != n_pf):
        raise DimensionMismatchError(f"trajectory of {trajectory.shape[0]} locations is too short for n_pf={n_pf}")
    return y, y_star, y_total


def _replicate_rows(rows, b):
    return slice(None) if b == 0 else rows[b - 1]


def _matrix_estimate(kind, closed, y, y_total, tally):
    """Coefficient-level estimate behind one index kind, or the error that made it undefined."""
    n, p = y.shape
    if kind is IndexKind.PLUGIN:
        tally(closed_matrix_flops(n, p))
        return vector_closed_pf(PfOutputs(y, y_total))
    if isinstance(closed, DegenerateVarianceError):
        raise closed
    if kind is IndexKind.TOTAL:
        tally(jansen_flops(n, p))
        return SobolMatrixEstimate(closed.d_u, closed.cov, closed.f0, vector_total_jansen(y, y_total))
    return closed


def _basis_replicate(y, y_star, y_total, kinds, forms, gram, fixed_cov, tally):
    """Maps and GSI of one (trajectory, replicate) by reprojection of p x p matrices."""
    n, p = y.shape
    m = forms.components.shape[1]
    tally(closed_matrix_flops(n, p))
    try:
        closed = vector_closed_pf(PfOutputs(y, y_star))
    except DegenerateVarianceError as error:
        closed = error
    results = {}
    for kind in kinds:
        plugin = kind is IndexKind.PLUGIN
        try:
            estimate = _matrix_estimate(kind, closed, y, y_total, tally)
        except DegenerateVarianceError as error:
            logger.warning("%s estimate recorded as missing: %s", kind.value, error)
            results[kind] = (np.full(m, np.nan), np.nan)
            continue
        values = reproject_map(estimate, forms, kind, fixed_cov).values
        tally(map_flops(p, m, plugin))
        try:
            if fixed_cov is None:
                value = gsi(estimate, gram, kind).value
            else:
                matrix = estimate.d_total if kind is IndexKind.TOTAL else estimate.d_u
                value = gsi_fixed_covariance(matrix, gram, fixed_cov, kind).value
        except DegenerateVarianceError as error:
            logger.warning("%s GSI recorded as missing: %s", kind.value, error)
            value = np.nan
        tally(gsi_flops(p, plugin))
        results[kind] = (values, value)
    return results


def _column_closed(y, y_star):
    f0 = (y.mean(axis=0) + y_star.mean(axis=0)) / 2.0
    d_u = np.mean(y * y_star, axis=0) - f0 ** 2
    d = np.mean((y ** 2 + y_star ** 2) / 2.0, axis=0) - f0 ** 2
    return f0, d_u, d


def _ratio_or_nan(numerator, denominator, floor):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > floor, numerator / denominator, np.nan)


def _dimensionwise_replicate(y, y_star, y_total, kinds, components, fixed_variance, tally):
    """
    Maps and GSI of one (trajectory, replicate): reconstruct v_l^T Y_k for every output
    dimension from the resampled coefficients and apply the scalar estimators column by column.
    """
    n, p = y.shape
    m = components.shape[1]
    y, y_star = y @ components, y_star @ components
    tally(2 * matmul_flops(n, p, m))
    if y_total is not None:
        y_total = y_total @ components
        tally(matmul_flops(n, p, m))
    f0, d_u, d = _column_closed(y, y_star)
    tally(column_closed_flops(n, m))
    if fixed_variance is not None:
        d = fixed_variance
        gsi_floor = variance_floor(0.0)
    else:
        gsi_floor = variance_floor(float(f0 @ f0))
    floor = variance_floor(f0 ** 2)
    results = {}
    for kind in kinds:
        if kind is IndexKind.PLUGIN:
            f0_c, numerator, d_c = _column_closed(y, y_total)
            denominator = d_c if fixed_variance is None else fixed_variance
            map_floor = variance_floor(f0_c ** 2)
            plug_floor = gsi_floor if fixed_variance is not None else variance_floor(float(f0_c @ f0_c))
            values = 1.0 - _ratio_or_nan(numerator, denominator, map_floor)
            value = 1.0 - _ratio_or_nan(numerator.sum(), denominator.sum(), plug_floor)
            tally(column_closed_flops(n, m) + 4 * m + 3)
        else:
            if kind is IndexKind.TOTAL:
                numerator = np.mean((y - y_total) ** 2, axis=0) / 2.0
                tally(column_total_flops(n, m))
            else:
                numerator = d_u
            values = _ratio_or_nan(numerator, d, floor)
            value = _ratio_or_nan(numerator.sum(), d.sum(), gsi_floor)
            tally(3 * m + 1)
        results[kind] = (values, float(value))
    return results


def _estimate_trajectory(trajectory, estimator, n_pf, rows, kinds, width, with_total, coords):
    n_x = rows.shape[0] + 1
    maps = {kind: np.full((width, n_x), np.nan) for kind in kinds}
    values = {kind: np.full(n_x, np.nan) for kind in kinds}
    y, y_star, y_total = _split(np.asarray(trajectory, dtype=float), n_pf, with_total)
    for b in range(n_x):
        r = _replicate_rows(rows, b)
        try:
            results = estimator(y[r], y_star[r], None if y_total is None else y_total[r], kinds)
        except NumericalError as error:
            raise error.annotate(b=b, **coords)
        for kind, (sensitivity_map, value) in results.items():
            maps[kind][:, b] = sensitivity_map
            values[kind][b] = value
    return maps, values


def _collect(trajectories, estimator, n_pf, rows, kinds, width, with_total, index_set, threads):
    """Run the replicate loop over every trajectory, in parallel over j."""

    def one(item):
        j, trajectory = item
        if callable(trajectory):
            trajectory = trajectory()
        trajectory_rows = np.asarray(rows(j) if callable(rows) else rows)
        return _estimate_trajectory(
            trajectory, estimator, n_pf, trajectory_rows, kinds, width, with_total, {"u": index_set.label(), "j": j}
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_trajectory = list(pool.map(one, trajectories))
    else:
        per_trajectory = [one(item) for item in trajectories]

    distributions = {}
    for kind in kinds:
        maps = np.stack([maps[kind] for maps, _ in per_trajectory], axis=1)
        gsi_values = np.stack([values[kind] for _, values in per_trajectory], axis=0)
        distributions[kind] = IndexDistribution(maps, gsi_values, index_set, kind, n_pf)
    return distributions


def _tally(counter, path):
    def tally(flops):
        counter.add(path, flops)

    return tally


def estimate_from_trajectories(
    trajectories,
    components,
    gram,
    n_pf,
    rows,
    index_set,
    kinds=(IndexKind.CLOSED,),
    fixed_cov=None,
    threads=1,
    counter=None,
):
    """
    Basis-derived estimation on pre-sampled coefficient trajectories.

    :param trajectories: iterable of (j, L x p array) or an N_Z x L x p array.
    :param components: p x m basis.
    :param gram: p x p Gram matrix of the basis.
    :param rows: (N_X - 1) x n_PF bootstrap rows shared by every trajectory, or a
        callable j -> rows of trajectory j (see ``trajectory_bootstrap``).
    :param fixed_cov: p x p DoE coefficient covariance, or None for the estimated one.
    :param counter: OperationCounter receiving the flops spent.
    :return: dict kind -> IndexDistribution.
    """
    kinds = tuple(IndexKind(kind) for kind in kinds)
    forms = QuadraticForms(components)
    with_total = any(kind is not IndexKind.CLOSED for kind in kinds)
    counter = counter or OperationCounter()
    tally = _tally(counter, BASIS_DERIVED)

    def estimator(y, y_star, y_total, selected):
        counter.replicate(BASIS_DERIVED)
        return _basis_replicate(y, y_star, y_total, selected, forms, gram, fixed_cov, tally)

    if isinstance(trajectories, np.ndarray):
        trajectories = enumerate(trajectories)
    return _collect(trajectories, estimator, n_pf, rows, kinds, forms.components.shape[1], with_total, index_set, threads)


def estimate_dimensionwise_from_trajectories(
    trajectories,
    components,
    n_pf,
    rows,
    index_set,
    kinds=(IndexKind.CLOSED,),
    fixed_cov=None,
    threads=1,
    counter=None,
):
    """
    Dimension-wise estimation: every replicate reconstructs the output dimensions from
    its resampled coefficients and applies the scalar estimators column by column.

    Arguments as in ``estimate_from_trajectories``.
    """
    kinds = tuple(IndexKind(kind) for kind in kinds)
    components = np.atleast_2d(np.asarray(components, dtype=float))
    with_total = any(kind is not IndexKind.CLOSED for kind in kinds)
    fixed_variance = None
    if fixed_cov is not None:
        fixed_variance = QuadraticForms(components)(fixed_cov)
    counter = counter or OperationCounter()
    tally = _tally(counter, DIMENSIONWISE)

    def estimator(y, y_star, y_total, selected):
        counter.replicate(DIMENSIONWISE)
        return _dimensionwise_replicate(y, y_star, y_total, selected, components, fixed_variance, tally)

    if isinstance(trajectories, np.ndarray):
        trajectories = enumerate(trajectories)
    return _collect(trajectories, estimator, n_pf, rows, kinds, components.shape[1], with_total, index_set, threads)


def _fixed_cov(basis, cfg):
    return coefficient_covariance(basis) if cfg.covariance is CovarianceMode.FIXED else None


def _trajectory_source(vgp, locations, cfg, stream):
    """Trajectories for the estimation loop; per-trajectory mode defers sampling to the workers."""
    if cfg.mode is SamplingMode.PER_TRAJECTORY and cfg.threads > 1:
        return [(j, lambda j=j: sample_trajectory(vgp, locations, j, cfg.seed, stream)) for j in range(cfg.n_z)]
    return iter_trajectories(vgp, locations, cfg.n_z, cfg.mode, cfg.seed, stream)


def _prepare(vgp, basis, space, index_set, cfg):
    if len(vgp) != basis.n_components:
        raise DimensionMismatchError(f"{len(vgp)} surrogates for a basis of {basis.n_components} components")
    design = make_pf_design(space, cfg.n_pf, index_set, cfg.seed)
    locations = design.locations(with_total=cfg.needs_total_locations)
    rows = trajectory_bootstrap(cfg.n_pf, cfg.n_x, cfg.seed, index_set.mask)
    stream = (STREAM_TRAJECTORY, index_set.mask, 0)
    return locations, rows, stream


def run_algorithm3(vgp, basis, space, index_set, cfg):
    """
    Basis-derived pick-freeze with GP trajectories and bootstrap replicates.

    One pick-freeze design, N_Z vector trajectories at its 2 n_PF (3 n_PF with totals)
    locations and N_X replicates per trajectory.

    :return: dict kind -> IndexDistribution (maps m x N_Z x N_X, gsi N_Z x N_X).
    """
    locations, rows, stream = _prepare(vgp, basis, space, index_set, cfg)
    logger.info(
        "%s: %d trajectories at %d locations, %d replicates (%s)",
        index_set.label(space.names),
        cfg.n_z,
        locations.shape[0],
        cfg.n_x,
        cfg.mode.value,
    )
    return estimate_from_trajectories(
        _trajectory_source(vgp, locations, cfg, stream),
        basis.components,
        basis.gram,
        cfg.n_pf,
        rows,
        index_set,
        cfg.kinds,
        _fixed_cov(basis, cfg),
        cfg.threads,
    )


def run_algorithm2_dimensionwise(vgp, basis, space, index_set, cfg):
    """Same trajectories and replicates as ``run_algorithm3``, estimated per output dimension."""
    locations, rows, stream = _prepare(vgp, basis, space, index_set, cfg)
    logger.info("%s: dimension-wise estimation over %d output dimensions", index_set.label(space.names), basis.width)
    return estimate_dimensionwise_from_trajectories(
        _trajectory_source(vgp, locations, cfg, stream),
        basis.components,
        cfg.n_pf,
        rows,
        index_set,
        cfg.kinds,
        _fixed_cov(basis, cfg),
        cfg.threads,
    )


def run_algorithm1_crude(vgp, basis, space, index_set, cfg):
    """
    Reference sampler: a fresh pick-freeze design and fresh trajectories for every b.

    Only meant for small configurations; the cost is N_X trajectory batches.
    """
    if len(vgp) != basis.n_components:
        raise DimensionMismatchError(f"{len(vgp)} surrogates for a basis of {basis.n_components} components")
    fixed_cov = _fixed_cov(basis, cfg)
    no_rows = np.empty((0, cfg.n_pf), dtype=int)
    parts = []
    for b in range(cfg.n_x):
        design = make_pf_design(space, cfg.n_pf, index_set, cfg.seed, b)
        locations = design.locations(with_total=cfg.needs_total_locations)
        batch = sample_trajectories(
            vgp, locations, cfg.n_z, cfg.mode, cfg.seed, (STREAM_TRAJECTORY, index_set.mask, b)
        )
        parts.append(
            estimate_from_trajectories(
                batch.values, basis.components, basis.gram, cfg.n_pf, no_rows, index_set, cfg.kinds, fixed_cov, cfg.threads
            )
        )
    return {
        kind: IndexDistribution(
            np.concatenate([part[kind].maps for part in parts], axis=2),
            np.concatenate([part[kind].gsi for part in parts], axis=1),
            index_set,
            kind,
            cfg.n_pf,
        )
        for kind in cfg.kinds
    }
