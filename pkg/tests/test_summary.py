import numpy as np
import pytest
from scipy import stats

from models import DimensionMismatchError, EmptySummaryError, IndexDistribution, IndexKind, IndexSet, SummaryScope
from services.summary import boxplot, error_attribution, summarize


def distribution(maps, gsi):
    return IndexDistribution(np.asarray(maps, dtype=float), np.asarray(gsi, dtype=float), IndexSet.single(0, 2), IndexKind.CLOSED, 100)


class TestBoxplot:
    def test_percentiles_interpolate_linearly(self):
        summary = boxplot(np.arange(1.0, 101.0))
        assert summary.median == pytest.approx(50.5)
        assert summary.q1 == pytest.approx(25.75)
        assert summary.q3 == pytest.approx(75.25)
        assert summary.p5 == pytest.approx(5.95)
        assert summary.p95 == pytest.approx(95.05)
        assert (summary.whisker_low, summary.whisker_high, summary.outliers) == (1.0, 100.0, 0)
        assert summary.iqr == pytest.approx(49.5)

    def test_outliers_beyond_whiskers(self):
        summary = boxplot(np.r_[np.arange(1.0, 11.0), 100.0])
        assert summary.q1 == pytest.approx(3.5)
        assert summary.q3 == pytest.approx(8.5)
        assert summary.whisker_high == 10.0
        assert summary.outliers == 1

    def test_missing_values_excluded(self):
        summary = boxplot([1.0, np.nan, 3.0])
        assert summary.median == pytest.approx(2.0)
        assert (summary.count, summary.missing) == (2, 1)

    def test_all_missing(self):
        with pytest.raises(EmptySummaryError):
            boxplot([np.nan, np.nan])


class TestSummarize:
    def test_scopes(self):
        maps = np.arange(12.0).reshape(2, 3, 2)
        gsi = np.array([[0.1, 0.5], [0.2, 0.6], [0.3, 0.7]])
        per_dimension, gsi_summary = summarize(distribution(maps, gsi), SummaryScope.METAMODEL)
        assert len(per_dimension) == 2
        assert gsi_summary.median == pytest.approx(0.2)
        assert gsi_summary.count == 3
        _, overall = summarize(distribution(maps, gsi), "overall")
        assert overall.count == 6
        assert overall.median == pytest.approx(0.4)

    def test_undefined_dimension(self, caplog):
        maps = np.ones((2, 3, 2))
        maps[1] = np.nan
        per_dimension, _ = summarize(distribution(maps, np.ones((3, 2))), "overall")
        assert np.isnan(per_dimension[1].median)
        assert per_dimension[1].missing == 6
        assert per_dimension[0].median == 1.0
        assert "no defined index values" in caplog.text

    def test_undefined_gsi(self):
        with pytest.raises(EmptySummaryError):
            summarize(distribution(np.ones((1, 2, 2)), np.full((2, 2), np.nan)), "overall")


class TestErrorAttribution:
    def test_shares(self):
        meta = boxplot([0.0, 1.0, 2.0, 3.0, 4.0])
        overall = boxplot([0.0, 4.0, 8.0, 12.0, 16.0])
        attribution = error_attribution(meta, overall)
        assert attribution.estimation_share[0] == pytest.approx(0.75)
        assert attribution.metamodel_share[0] == pytest.approx(0.25)

    def test_overall_narrower_than_metamodel(self):
        attribution = error_attribution(boxplot([0.0, 4.0, 8.0]), boxplot([0.0, 1.0, 2.0]))
        assert attribution.estimation_share[0] == 0.0

    def test_zero_width_undefined(self):
        flat = boxplot([0.5, 0.5, 0.5])
        attribution = error_attribution(flat, flat)
        assert attribution.undefined.tolist() == [True]

    def test_lists_must_match(self):
        with pytest.raises(DimensionMismatchError):
            error_attribution([boxplot([1.0, 2.0])], [])

    def test_estimation_share_follows_pick_freeze_noise(self):
        """Adding more estimation noise on top of a fixed metamodel spread raises the estimation share."""
        rng = np.random.default_rng(3)
        base = rng.normal(size=400)
        noise = rng.normal(size=400)
        scales = np.linspace(0.1, 3.0, 12)
        attribution = error_attribution([boxplot(base)] * scales.size, [boxplot(base + s * noise) for s in scales])
        assert stats.spearmanr(scales, attribution.estimation_share)[0] > 0.9
        assert stats.spearmanr(scales, attribution.metamodel_share)[0] < -0.9
