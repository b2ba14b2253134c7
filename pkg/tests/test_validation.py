import numpy as np
import pytest

from models import (
    DimensionMismatchError,
    FunctionalOutputs,
    InvalidDesignError,
    TestModel,
    TestModelKind,
    UndefinedQ2Error,
)
from services.sampling import lhs_sample
from services.test_models import eval_test_model
from services.validation import q2, q2_trajectory_report


@pytest.fixture(scope="module")
def held_out(square):
    design = lhs_sample(square, 20, seed=99)
    return design, eval_test_model(TestModel(TestModelKind.ADDITIVE_SINE, output_dims=30), design)


class TestQ2:
    def test_perfect_prediction(self):
        observed = np.array([1.0, 2.0, 4.0])
        assert q2(observed, observed) == 1.0

    def test_mean_prediction_scores_zero(self):
        observed = np.array([1.0, 2.0, 6.0])
        assert q2(np.full(3, 3.0), observed) == pytest.approx(0.0)

    def test_constant_observations(self):
        with pytest.raises(UndefinedQ2Error):
            q2(np.array([1.0, 2.0]), np.array([3.0, 3.0]))

    def test_needs_two_points(self):
        with pytest.raises(InvalidDesignError):
            q2(np.array([1.0]), np.array([1.0]))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            q2(np.ones(3), np.ones(4))


class TestQ2TrajectoryReport:
    def test_additive_sine_is_well_predicted(self, additive_surrogates, held_out):
        expansion, vgp = additive_surrogates
        design, outputs = held_out
        report = q2_trajectory_report(vgp, expansion, design, outputs, n_z=8, seed=1)
        assert report.values.shape == (8, 30)
        assert np.all(report.p5 <= report.p50) and np.all(report.p50 <= report.p95)
        assert np.nanmin(report.p50) > 0.99
        np.testing.assert_array_equal(report.grid, outputs.grid)

    def test_seeded(self, additive_surrogates, held_out):
        expansion, vgp = additive_surrogates
        design, outputs = held_out
        first = q2_trajectory_report(vgp, expansion, design, outputs, n_z=3, seed=4)
        second = q2_trajectory_report(vgp, expansion, design, outputs, n_z=3, seed=4, mode="per-trajectory")
        np.testing.assert_array_equal(first.values, second.values)

    def test_constant_dimension_is_undefined(self, additive_surrogates, held_out, caplog):
        expansion, vgp = additive_surrogates
        design, outputs = held_out
        values = outputs.values.copy()
        values[:, 3] = 1.0
        report = q2_trajectory_report(vgp, expansion, design, FunctionalOutputs(values, outputs.grid), n_z=2, seed=0)
        assert np.all(np.isnan(report.values[:, 3]))
        assert np.isnan(report.p50[3])
        assert "constant on the validation set" in caplog.text

    def test_width_checked(self, additive_surrogates, held_out):
        expansion, vgp = additive_surrogates
        design, outputs = held_out
        with pytest.raises(DimensionMismatchError):
            q2_trajectory_report(vgp, expansion, design, FunctionalOutputs(outputs.values[:, :5]), n_z=2, seed=0)
