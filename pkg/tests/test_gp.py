import tracemalloc

import numpy as np
import pytest

from models import (
    DesignMatrix,
    GpOptions,
    DimensionMismatchError,
    IllConditionedKernelError,
    InputSpace,
    InvalidDesignError,
    KernelParams,
    SamplingMode,
    VectorGp,
)
from services.gp import (
    condition,
    conditional_moments,
    fit_gp,
    fit_vector_gp,
    log_marginal_likelihood,
    sample_trajectories,
    sample_trajectory,
    stable_cholesky,
)
from services.sampling import lhs_sample

FAST_GP = GpOptions(starts=2, max_iter=100)


def smooth(points):
    return np.sin(3.0 * points[:, 0]) + points[:, 1] ** 2


@pytest.fixture(scope="module")
def conditioned(square):
    design = lhs_sample(square, 12, seed=2)
    return condition(KernelParams([0.4, 0.6], 1.5), design, smooth(design.points))


class TestStableCholesky:
    def test_no_jitter_when_positive_definite(self):
        factor, jitter = stable_cholesky(np.array([[2.0, 0.5], [0.5, 1.0]]), 1.0)
        assert jitter == 0.0
        np.testing.assert_allclose(factor @ factor.T, [[2.0, 0.5], [0.5, 1.0]])

    def test_singular_matrix_gets_jitter(self):
        _, jitter = stable_cholesky(np.ones((3, 3)), 1.0)
        assert 0.0 < jitter <= 1e-4

    def test_indefinite_matrix(self):
        with pytest.raises(IllConditionedKernelError):
            stable_cholesky(-np.eye(3), 1.0)

    def test_jitter_leaves_input_untouched(self):
        matrix = np.ones((4, 4))
        factor, jitter = stable_cholesky(matrix, 1.0)
        np.testing.assert_array_equal(matrix, np.ones((4, 4)))
        np.testing.assert_allclose(factor @ factor.T, matrix + jitter * np.eye(4), atol=1e-12)

    def test_jitter_attempts_reuse_one_buffer(self):
        matrix = np.ones((300, 300))
        tracemalloc.start()
        try:
            stable_cholesky(matrix, 1.0)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        assert peak < 2.5 * matrix.nbytes


class TestLogMarginalLikelihood:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        points = rng.random((12, 2))
        targets = rng.normal(size=12)
        log_params = np.log([0.5, 0.8, 1.3, 1e-3])
        _, grad = log_marginal_likelihood(log_params, points, targets, return_grad=True)
        h = 1e-6
        for i in range(4):
            step = np.zeros(4)
            step[i] = h
            numeric = (
                log_marginal_likelihood(log_params + step, points, targets)
                - log_marginal_likelihood(log_params - step, points, targets)
            ) / (2 * h)
            assert grad[i] == pytest.approx(numeric, rel=1e-4, abs=1e-6)


class TestCondition:
    def test_interpolates_design(self, conditioned):
        mean, cov = conditional_moments(conditioned, conditioned.design.points)
        np.testing.assert_allclose(mean, conditioned.train_targets, atol=1e-6)
        assert np.all(np.diag(cov) <= 1e-6)
        assert np.all(np.diag(cov) >= 0.0)

    def test_covariance_symmetric(self, conditioned):
        _, cov = conditional_moments(conditioned, np.random.default_rng(1).random((6, 2)))
        np.testing.assert_array_equal(cov, cov.T)

    def test_target_count_checked(self, conditioned):
        with pytest.raises(DimensionMismatchError):
            condition(conditioned.params, conditioned.design, np.ones(3))

    def test_query_width_checked(self, conditioned):
        with pytest.raises(DimensionMismatchError):
            conditional_moments(conditioned, np.zeros((2, 3)))


class TestFitGp:
    def test_predicts_held_out_points(self, square):
        design = lhs_sample(square, 30, seed=4)
        gp = fit_gp(design, smooth(design.points), FAST_GP)
        query = lhs_sample(square, 20, seed=5).points
        mean, _ = conditional_moments(gp, query)
        np.testing.assert_allclose(mean, smooth(query), atol=0.05)
        assert np.isfinite(gp.log_likelihood)

    def test_needs_two_points(self, square):
        with pytest.raises(InvalidDesignError):
            fit_gp(DesignMatrix([[0.5, 0.5]], square), [1.0], FAST_GP)

    def test_non_finite_targets(self, square):
        design = lhs_sample(square, 5, seed=0)
        with pytest.raises(InvalidDesignError):
            fit_gp(design, [0.0, 1.0, np.nan, 2.0, 3.0], FAST_GP)

    def test_threads_give_identical_fits(self, square):
        design = lhs_sample(square, 15, seed=6)
        coefficients = np.column_stack([smooth(design.points), design.points[:, 0]])
        serial = fit_vector_gp(design, coefficients, FAST_GP)
        parallel = fit_vector_gp(design, coefficients, FAST_GP, threads=2)
        assert len(parallel) == 2
        for first, second in zip(serial, parallel):
            np.testing.assert_allclose(first.params.lengthscales, second.params.lengthscales, rtol=1e-8)


class TestSampleTrajectories:
    def test_modes_are_bit_identical(self, conditioned):
        vgp = VectorGp((conditioned, conditioned))
        query = np.random.default_rng(3).random((15, 2))
        batch = sample_trajectories(vgp, query, 4, SamplingMode.BATCH, seed=9)
        per_trajectory = sample_trajectories(vgp, query, 4, SamplingMode.PER_TRAJECTORY, seed=9)
        np.testing.assert_array_equal(batch.values, per_trajectory.values)
        np.testing.assert_array_equal(batch.trajectory(2), sample_trajectory(vgp, query, 2, seed=9))
        assert batch.values.shape == (4, 15, 2)

    def test_coefficients_draw_independent_noise(self, conditioned):
        vgp = VectorGp((conditioned, conditioned))
        values = sample_trajectories(vgp, np.random.default_rng(3).random((5, 2)), 2, seed=1).values
        assert not np.array_equal(values[:, :, 0], values[:, :, 1])

    def test_empirical_moments(self, conditioned):
        """Sample mean and variance agree with the kriging moments."""
        query = np.array([[0.1, 0.9], [0.55, 0.45], [0.95, 0.05]])
        n_z = 10_000
        draws = sample_trajectories(VectorGp((conditioned,)), query, n_z, seed=3).values[:, :, 0]
        mean, cov = conditional_moments(conditioned, query)
        std_error = np.sqrt(np.diag(cov) / n_z)
        assert np.all(np.abs(draws.mean(axis=0) - mean) <= 4.0 * std_error + 1e-9)
        np.testing.assert_allclose(draws.var(axis=0), np.diag(cov), rtol=0.1)

    def test_invalid_sizes(self, conditioned):
        with pytest.raises(InvalidDesignError):
            sample_trajectories(VectorGp((conditioned,)), np.zeros((0, 2)), 3)
        with pytest.raises(InvalidDesignError):
            sample_trajectories(VectorGp((conditioned,)), np.zeros((2, 2)), 0)


class TestDuplicatedDesignRows:
    def test_fit_absorbs_conflicting_targets(self):
        """A repeated design point with a small target discrepancy is explained by the nugget."""
        line = InputSpace.unit(1)
        x = np.linspace(0.0, 1.0, 12)
        points = np.concatenate([x, [x[5]]])[:, None]
        targets = np.sin(4.0 * points[:, 0])
        targets[-1] += 0.05
        gp = fit_gp(DesignMatrix(points, line), targets, FAST_GP)
        assert gp.params.signal_variance < 10.0
        assert gp.params.nugget > 0.0
        assert np.isfinite(gp.log_likelihood) and gp.log_likelihood > -100.0
        assert np.max(np.abs(gp.alpha)) < 1e4
        mean, _ = conditional_moments(gp, np.array([[0.33]]))
        assert mean[0] == pytest.approx(np.sin(4.0 * 0.33), abs=0.1)
