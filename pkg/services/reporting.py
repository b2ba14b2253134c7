"""Tidy tables of summaries, raw GSI samples, attribution and Q2 curves."""

import numpy as np
import pandas as pd

from models import SummaryScope
from services.summary import error_attribution, summarize

SUMMARY_FIELDS = ["median", "q1", "q3", "whisker_low", "whisker_high", "p5", "p95", "outliers", "count", "missing"]
INDEX_STATISTICS = ("median", "q1", "q3", "whisker_low", "whisker_high", "p5", "p95")


def range_slack(n_pf):
    """Noise slack 2 / sqrt(n_PF) around [0, 1]."""
    return 2.0 / np.sqrt(n_pf)


def _out_of_range(value, slack):
    return bool(np.isfinite(value) and (value < -slack or value > 1.0 + slack))


def _summary_out_of_range(summary, slack):
    """Any emitted index statistic of the summary outside the slackened [0, 1]."""
    return any(_out_of_range(getattr(summary, name), slack) for name in INDEX_STATISTICS)


class DistributionReport:
    """Summaries of one IndexDistribution in both scopes."""

    def __init__(self, distribution, label, coordinates):
        self.distribution = distribution
        self.label = label
        self.coordinates = np.asarray(coordinates, dtype=float)
        self.slack = range_slack(distribution.n_pf)
        self.scopes = {scope: summarize(distribution, scope) for scope in SummaryScope}

    @property
    def kind(self):
        return self.distribution.kind.value

    def map_rows(self):
        rows = []
        for scope, (per_dimension, _) in self.scopes.items():
            for dimension, summary in enumerate(per_dimension):
                row = {
                    "variable": self.label,
                    "kind": self.kind,
                    "scope": scope.value,
                    "dimension": dimension,
                    "grid": self.coordinates[dimension],
                }
                row.update(summary.as_row())
                row["out_of_range"] = _summary_out_of_range(summary, self.slack)
                rows.append(row)
        return rows

    def gsi_rows(self):
        rows = []
        for scope, (_, summary) in self.scopes.items():
            row = {"variable": self.label, "kind": self.kind, "scope": scope.value}
            row.update(summary.as_row())
            row["out_of_range"] = _summary_out_of_range(summary, self.slack)
            rows.append(row)
        return rows

    def gsi_sample_rows(self):
        gsi = self.distribution.gsi
        return [
            {
                "variable": self.label,
                "kind": self.kind,
                "trajectory": j,
                "replicate": b,
                "gsi": gsi[j, b],
                "out_of_range": _out_of_range(gsi[j, b], self.slack),
            }
            for j in range(gsi.shape[0])
            for b in range(gsi.shape[1])
        ]

    def attribution_rows(self):
        meta_maps, meta_gsi = self.scopes[SummaryScope.METAMODEL]
        all_maps, all_gsi = self.scopes[SummaryScope.OVERALL]
        rows = []
        per_dimension = error_attribution(meta_maps, all_maps)
        for dimension in range(len(meta_maps)):
            rows.append(self._attribution_row("map", dimension, self.coordinates[dimension], per_dimension, dimension))
        rows.append(self._attribution_row("gsi", None, None, error_attribution(meta_gsi, all_gsi), 0))
        return rows

    def _attribution_row(self, target, dimension, grid, attribution, i):
        return {
            "variable": self.label,
            "kind": self.kind,
            "target": target,
            "dimension": dimension,
            "grid": grid,
            "width_metamodel": attribution.width_metamodel[i],
            "width_overall": attribution.width_overall[i],
            "metamodel_share": attribution.metamodel_share[i],
            "estimation_share": attribution.estimation_share[i],
        }


def run_tables(reports):
    """The four run tables keyed by file name."""
    return {
        "maps_summary.csv": pd.DataFrame([row for report in reports for row in report.map_rows()]),
        "gsi_summary.csv": pd.DataFrame([row for report in reports for row in report.gsi_rows()]),
        "gsi_samples.csv": pd.DataFrame([row for report in reports for row in report.gsi_sample_rows()]),
        "attribution.csv": pd.DataFrame([row for report in reports for row in report.attribution_rows()]),
    }


def sweep_rows(sweep, value, reports):
    """Long-format boxplot statistics keyed by (sweep value, variable, scope, statistic)."""
    rows = []
    for report in reports:
        for scope, (_, summary) in report.scopes.items():
            for statistic in SUMMARY_FIELDS:
                rows.append(
                    {
                        "sweep": sweep,
                        "value": value,
                        "variable": report.label,
                        "kind": report.kind,
                        "scope": scope.value,
                        "statistic": statistic,
                        "gsi": getattr(summary, statistic),
                        "out_of_range": statistic in INDEX_STATISTICS
                        and _out_of_range(getattr(summary, statistic), report.slack),
                    }
                )
    return rows


def q2_tables(report):
    """(percentile curves, per-trajectory samples) of a Q2Report."""
    grid = report.grid if report.grid is not None else np.arange(report.values.shape[1], dtype=float)
    percentiles = pd.DataFrame(
        {"dimension": np.arange(grid.shape[0]), "grid": grid, "p5": report.p5, "p50": report.p50, "p95": report.p95}
    )
    n_z, m = report.values.shape
    samples = pd.DataFrame(
        {
            "trajectory": np.repeat(np.arange(n_z), m),
            "dimension": np.tile(np.arange(m), n_z),
            "q2": report.values.ravel(),
        }
    )
    return percentiles, samples
