"""Boxplot statistics of index distributions and error attribution."""

import logging

import numpy as np

from models import Attribution, BoxplotSummary, DimensionMismatchError, EmptySummaryError, SummaryScope

logger = logging.getLogger(__name__)

WHISKER = 1.5


def boxplot(values):
    """
    Tukey boxplot of a sample; NaN entries are excluded and counted as missing.

    Percentiles use linear interpolation. Whiskers reach the most extreme data points
    within 1.5 IQR of the quartiles.
    """
    values = np.asarray(values, dtype=float).ravel()
    finite = values[~np.isnan(values)]
    missing = values.size - finite.size
    if finite.size == 0:
        raise EmptySummaryError(f"no defined values to summarize ({missing} missing)")
    p5, q1, median, q3, p95 = np.percentile(finite, [5, 25, 50, 75, 95])
    iqr = q3 - q1
    inside = finite[(finite >= q1 - WHISKER * iqr) & (finite <= q3 + WHISKER * iqr)]
    return BoxplotSummary(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        p5=float(p5),
        p95=float(p95),
        outliers=int(finite.size - inside.size),
        count=int(finite.size),
        missing=int(missing),
    )


def _missing_summary(count):
    nan = float("nan")
    return BoxplotSummary(nan, nan, nan, nan, nan, nan, nan, 0, 0, count)


def summarize(distribution, scope):
    """
    Boxplot per output dimension and for the GSI.

    Output dimensions whose values are all undefined get an all-NaN summary; an
    all-missing GSI sample raises EmptySummaryError.

    :return: (list of m BoxplotSummary, BoxplotSummary of the GSI).
    """
    maps, gsi_values = distribution.view(SummaryScope(scope))
    per_dimension = []
    for row in maps:
        if np.all(np.isnan(row)):
            per_dimension.append(_missing_summary(row.size))
        else:
            per_dimension.append(boxplot(row))
    undefined = sum(summary.count == 0 for summary in per_dimension)
    if undefined:
        logger.warning("%d output dimensions have no defined index values", undefined)
    return per_dimension, boxplot(gsi_values)


def error_attribution(metamodel, overall, eps=1e-12):
    """
    Shares of the overall spread owed to metamodeling and to pick-freeze estimation.

    Widths are interquartile ranges; estimation share = max(W_overall - W_meta, 0) / W_overall,
    undefined (NaN) where W_overall <= eps.

    :param metamodel: BoxplotSummary or list of them (metamodel-only scope).
    :param overall: matching BoxplotSummary or list (overall scope).
    """
    single = isinstance(metamodel, BoxplotSummary)
    metamodel = [metamodel] if single else list(metamodel)
    overall = [overall] if isinstance(overall, BoxplotSummary) else list(overall)
    if len(metamodel) != len(overall):
        raise DimensionMismatchError(f"{len(metamodel)} metamodel summaries for {len(overall)} overall summaries")
    width_meta = np.array([summary.iqr for summary in metamodel])
    width_all = np.array([summary.iqr for summary in overall])
    with np.errstate(divide="ignore", invalid="ignore"):
        estimation = np.where(width_all > eps, np.maximum(width_all - width_meta, 0.0) / width_all, np.nan)
    return Attribution(1.0 - estimation, estimation, width_meta, width_all)
