import numpy as np
import pytest

import services.errquant as errquant
from models import (
    CovarianceMode,
    DegenerateVarianceError,
    DimensionMismatchError,
    IndexKind,
    IndexSet,
    PfOutputs,
    RunConfig,
    SamplingMode,
    VectorGp,
)
from services.basis import coefficient_covariance
from services.errquant import (
    batch_memory_mb,
    estimate_dimensionwise_from_trajectories,
    estimate_from_trajectories,
    run_algorithm1_crude,
    run_algorithm2_dimensionwise,
    run_algorithm3,
    trajectory_bootstrap,
)
from services.pickfreeze import bootstrap_indices, vector_closed_pf
from services.sensitivity import gsi

ALL_KINDS = (IndexKind.CLOSED, IndexKind.TOTAL, IndexKind.PLUGIN)


@pytest.fixture
def trajectories():
    """Three correlated coefficient trajectories at 3 x 60 pick-freeze locations."""
    rng = np.random.default_rng(12)
    base = rng.normal(size=(3, 60, 3))
    frozen = 0.7 * base + 0.5 * rng.normal(size=(3, 60, 3))
    total = 0.4 * base + 0.9 * rng.normal(size=(3, 60, 3))
    return np.concatenate([base, frozen, total], axis=1) + np.array([1.0, -2.0, 0.5])


def assert_same_distribution(first, second):
    np.testing.assert_allclose(first.maps, second.maps, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(first.gsi, second.gsi, rtol=1e-10, atol=1e-12)


class TestBatchMemory:
    def test_mebibytes(self):
        assert batch_memory_mb(8, 16, 1024) == pytest.approx(1.0)


class TestEstimateFromTrajectories:
    @pytest.mark.parametrize("fixed", [False, True])
    def test_matches_dimensionwise_estimation(self, trajectories, skewed_basis, fixed):
        """Reprojected coefficient matrices equal the per-dimension scalar estimates."""
        rows = bootstrap_indices(60, 4, seed=1)
        index_set = IndexSet.single(0, 3)
        fixed_cov = coefficient_covariance(skewed_basis) if fixed else None
        basis = estimate_from_trajectories(
            trajectories, skewed_basis.components, skewed_basis.gram, 60, rows, index_set, ALL_KINDS, fixed_cov
        )
        dimensionwise = estimate_dimensionwise_from_trajectories(
            trajectories, skewed_basis.components, 60, rows, index_set, ALL_KINDS, fixed_cov
        )
        for kind in ALL_KINDS:
            assert basis[kind].maps.shape == (7, 3, 4)
            assert basis[kind].gsi.shape == (3, 4)
            assert_same_distribution(basis[kind], dimensionwise[kind])

    def test_first_replicate_is_unresampled(self, trajectories, skewed_basis):
        rows = bootstrap_indices(60, 2, seed=1)
        result = estimate_from_trajectories(
            trajectories, skewed_basis.components, skewed_basis.gram, 60, rows, IndexSet.single(0, 3)
        )[IndexKind.CLOSED]
        estimate = vector_closed_pf(PfOutputs(trajectories[1, :60], trajectories[1, 60:120]))
        assert result.gsi[1, 0] == pytest.approx(gsi(estimate, skewed_basis.gram).value, rel=1e-12)

    def test_single_output_dimension(self, trajectories):
        """With m = 1 both estimators reduce to the scalar one."""
        components = np.array([[1.0], [0.5], [-0.25]])
        rows = bootstrap_indices(60, 3, seed=5)
        basis = estimate_from_trajectories(trajectories, components, components @ components.T, 60, rows, IndexSet.single(1, 3))
        dimensionwise = estimate_dimensionwise_from_trajectories(trajectories, components, 60, rows, IndexSet.single(1, 3))
        assert_same_distribution(basis[IndexKind.CLOSED], dimensionwise[IndexKind.CLOSED])
        np.testing.assert_allclose(basis[IndexKind.CLOSED].maps[0], basis[IndexKind.CLOSED].gsi, rtol=1e-10)

    def test_threads_do_not_change_results(self, trajectories, skewed_basis):
        rows = bootstrap_indices(60, 3, seed=1)
        args = (skewed_basis.components, skewed_basis.gram, 60, rows, IndexSet.single(2, 3), ALL_KINDS)
        serial = estimate_from_trajectories(trajectories, *args)
        parallel = estimate_from_trajectories(trajectories, *args, threads=3)
        for kind in ALL_KINDS:
            np.testing.assert_array_equal(serial[kind].maps, parallel[kind].maps)

    def test_degenerate_replicate_is_missing(self, skewed_basis, caplog):
        """A constant trajectory yields NaN estimates and a warning instead of an error."""
        flat = np.ones((1, 40, 3))
        rows = bootstrap_indices(20, 2, seed=0)
        result = estimate_from_trajectories(flat, skewed_basis.components, skewed_basis.gram, 20, rows, IndexSet.single(0, 3))
        assert np.all(np.isnan(result[IndexKind.CLOSED].gsi))
        assert "recorded as missing" in caplog.text

    def test_degenerate_kind_leaves_other_kinds(self, trajectories, skewed_basis, monkeypatch, caplog):
        """A total GSI with a vanishing denominator is missing while its map and the closed kind survive."""
        real_gsi = errquant.gsi

        def total_fails(estimate, gram, kind=IndexKind.CLOSED):
            if IndexKind(kind) is IndexKind.TOTAL:
                raise DegenerateVarianceError("total denominator vanished")
            return real_gsi(estimate, gram, kind)

        rows = bootstrap_indices(60, 3, seed=2)
        args = (skewed_basis.components, skewed_basis.gram, 60, rows, IndexSet.single(0, 3), ALL_KINDS)
        reference = estimate_from_trajectories(trajectories, *args)
        monkeypatch.setattr(errquant, "gsi", total_fails)
        result = estimate_from_trajectories(trajectories, *args)
        assert np.all(np.isnan(result[IndexKind.TOTAL].gsi))
        assert np.all(np.isfinite(result[IndexKind.TOTAL].maps))
        for kind in (IndexKind.CLOSED, IndexKind.PLUGIN):
            assert_same_distribution(result[kind], reference[kind])
        assert "total GSI recorded as missing" in caplog.text


class TestTrajectoryBootstrap:
    def test_rows_differ_between_trajectories(self):
        rows = trajectory_bootstrap(60, 5, 3, 0b1)
        assert rows(0).shape == (4, 60)
        np.testing.assert_array_equal(rows(0), rows(0))
        assert not np.array_equal(rows(0), rows(1))

    def test_replicates_of_twin_trajectories_are_uncorrelated(self, trajectories, skewed_basis):
        """Two identical trajectories share replicate 0 but resample independently afterwards."""
        twins = np.stack([trajectories[0], trajectories[0]])
        rows = trajectory_bootstrap(60, 41, 3, 0b1)
        result = estimate_from_trajectories(
            twins, skewed_basis.components, skewed_basis.gram, 60, rows, IndexSet.single(0, 3)
        )[IndexKind.CLOSED]
        assert result.gsi[0, 0] == result.gsi[1, 0]
        first, second = result.gsi[0, 1:], result.gsi[1, 1:]
        assert not np.allclose(first, second)
        assert abs(np.corrcoef(first, second)[0, 1]) < 0.6

    def test_dimensionwise_path_draws_the_same_rows(self, trajectories, skewed_basis):
        rows = trajectory_bootstrap(60, 4, 9, 0b10)
        index_set = IndexSet.single(1, 3)
        basis = estimate_from_trajectories(
            trajectories, skewed_basis.components, skewed_basis.gram, 60, rows, index_set, ALL_KINDS
        )
        dimensionwise = estimate_dimensionwise_from_trajectories(
            trajectories, skewed_basis.components, 60, rows, index_set, ALL_KINDS
        )
        for kind in ALL_KINDS:
            assert_same_distribution(basis[kind], dimensionwise[kind])


@pytest.fixture(scope="module")
def small_run():
    return RunConfig(n_pf=80, n_z=3, n_x=4, kinds=ALL_KINDS, seed=21)


class TestRunAlgorithms:
    @pytest.mark.parametrize("covariance", ["empirical", "fixed"])
    def test_basis_and_dimensionwise_agree(self, random_surrogates, cube, small_run, covariance):
        expansion, vgp = random_surrogates
        cfg = small_run.replace(covariance=covariance)
        index_set = IndexSet((0, 1), 3)
        basis = run_algorithm3(vgp, expansion, cube, index_set, cfg)
        dimensionwise = run_algorithm2_dimensionwise(vgp, expansion, cube, index_set, cfg)
        for kind in ALL_KINDS:
            assert_same_distribution(basis[kind], dimensionwise[kind])
            assert basis[kind].maps.shape == (50, 3, 4)

    def test_deterministic_across_modes_and_threads(self, random_surrogates, cube, small_run):
        expansion, vgp = random_surrogates
        index_set = IndexSet.single(2, 3)
        reference = run_algorithm3(vgp, expansion, cube, index_set, small_run)
        for changes in ({"threads": 3}, {"mode": "per-trajectory"}, {"mode": "per-trajectory", "threads": 2}):
            other = run_algorithm3(vgp, expansion, cube, index_set, small_run.replace(**changes))
            for kind in ALL_KINDS:
                np.testing.assert_array_equal(reference[kind].maps, other[kind].maps)
                np.testing.assert_array_equal(reference[kind].gsi, other[kind].gsi)

    def test_seed_changes_results(self, random_surrogates, cube, small_run):
        expansion, vgp = random_surrogates
        index_set = IndexSet.single(0, 3)
        first = run_algorithm3(vgp, expansion, cube, index_set, small_run)[IndexKind.CLOSED]
        second = run_algorithm3(vgp, expansion, cube, index_set, small_run.replace(seed=22))[IndexKind.CLOSED]
        assert not np.array_equal(first.gsi, second.gsi)

    def test_crude_first_iteration_matches_basis_run(self, random_surrogates, cube, small_run):
        expansion, vgp = random_surrogates
        cfg = small_run.replace(n_z=1, n_x=1)
        index_set = IndexSet.single(1, 3)
        crude = run_algorithm1_crude(vgp, expansion, cube, index_set, cfg)
        basis = run_algorithm3(vgp, expansion, cube, index_set, cfg)
        for kind in ALL_KINDS:
            np.testing.assert_allclose(crude[kind].maps, basis[kind].maps, rtol=1e-12)

    def test_crude_samples_once_per_replicate(self, random_surrogates, cube, small_run, monkeypatch):
        expansion, vgp = random_surrogates
        calls = []
        original = errquant.sample_trajectories

        def counting(*args, **kwargs):
            calls.append(args[-1])
            return original(*args, **kwargs)

        monkeypatch.setattr(errquant, "sample_trajectories", counting)
        result = run_algorithm1_crude(vgp, expansion, cube, IndexSet.single(0, 3), small_run)
        assert len(calls) == small_run.n_x
        assert len(set(calls)) == small_run.n_x
        assert result[IndexKind.CLOSED].maps.shape == (50, 3, 4)

    def test_surrogate_count_checked(self, random_surrogates, cube, small_run):
        expansion, vgp = random_surrogates
        with pytest.raises(DimensionMismatchError):
            run_algorithm3(VectorGp(vgp.surrogates[:2]), expansion, cube, IndexSet.single(0, 3), small_run)

    def test_fixed_covariance_mode_enum(self, small_run):
        assert small_run.replace(covariance="fixed").covariance is CovarianceMode.FIXED
        assert small_run.replace(mode="per-trajectory").mode is SamplingMode.PER_TRAJECTORY


@pytest.mark.slow
class TestAdditiveSineDistributions:
    def test_crude_and_basis_means_agree(self, additive_surrogates, square):
        expansion, vgp = additive_surrogates
        cfg = RunConfig(n_pf=2000, n_z=20, n_x=20, seed=3)
        index_set = IndexSet.single(0, 2)
        crude = run_algorithm1_crude(vgp, expansion, square, index_set, cfg)[IndexKind.CLOSED]
        basis = run_algorithm3(vgp, expansion, square, index_set, cfg)[IndexKind.CLOSED]
        assert np.nanmean(crude.gsi) == pytest.approx(np.nanmean(basis.gsi), abs=0.05)
