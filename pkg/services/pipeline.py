"""
End-to-end pipelines behind the command line verbs.

Each pipeline reads the data source of a PipelineConfig, fits the basis and the
coefficient surrogates, runs the analysis and writes its artifacts with a manifest.
"""

import json
import logging
import os
import time

import numpy as np
import pandas as pd

from database.outputs_store import read_design, read_outputs
from database.results_store import write_manifest, write_table
from database.surrogate_store import load_surrogates, save_surrogates
from models import ConfigError, IndexSet, SamplingMode
from services.basis import fit_pca
from services.costs import BASIS_DERIVED, DIMENSIONWISE, OperationCounter, predicted_costs
from services.errquant import (
    batch_memory_mb,
    estimate_dimensionwise_from_trajectories,
    estimate_from_trajectories,
    run_algorithm3,
    trajectory_bootstrap,
)
from services.gp import fit_vector_gp
from services.reporting import DistributionReport, q2_tables, run_tables, sweep_rows
from services.sampling import (
    STREAM_BENCH,
    STREAM_BOOTSTRAP,
    STREAM_DESIGN,
    STREAM_DOE,
    STREAM_TRAJECTORY,
    STREAM_VALIDATION,
    derive_seed,
    make_rng,
    sample_design,
)
from services.test_models import eval_test_model
from services.validation import q2_trajectory_report

logger = logging.getLogger(__name__)


class Stopwatch:
    """Wall-clock seconds per named stage."""

    def __init__(self):
        self.timings = {}

    def stage(self, name):
        return _Stage(self, name)


class _Stage:
    def __init__(self, watch, name):
        self.watch = watch
        self.name = name

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.watch.timings[self.name] = self.watch.timings.get(self.name, 0.0) + time.perf_counter() - self.start
        return False


def seed_streams(seed):
    return {
        "master": int(seed),
        "streams": {
            "doe": [STREAM_DOE],
            "design": [STREAM_DESIGN, "index-set mask", "b"],
            "bootstrap": [STREAM_BOOTSTRAP, "index-set mask", "j"],
            "trajectory": [STREAM_TRAJECTORY, "index-set mask", "b", "q", "j"],
            "validation": [STREAM_VALIDATION, "q", "j"],
            "bench": [STREAM_BENCH],
            "bench bootstrap": [STREAM_BOOTSTRAP, STREAM_BENCH, "j"],
        },
    }


def load_data(cfg, n=None):
    """
    Design and outputs of the configured data source.

    :param n: design size for model sources (defaults to cfg.n).
    :return: (DesignMatrix, FunctionalOutputs).
    """
    if cfg.source == "csv":
        design = read_design(cfg.doe_path, cfg.space)
        outputs = read_outputs(cfg.outputs_path, design=design, header=cfg.outputs_header)
    else:
        n = cfg.n if n is None else n
        design = sample_design(cfg.space, n, cfg.design_method, derive_seed(cfg.run.seed, STREAM_DOE))
        outputs = eval_test_model(cfg.model, design)
    logger.info("data: %d design points, %d output dimensions", design.size, outputs.width)
    return design, outputs


def fit_surrogates(design, outputs, cfg):
    """(BasisExpansion, VectorGp) fitted on a design and its outputs."""
    outputs.check_rows(design)
    expansion = fit_pca(outputs, cfg.criterion)
    vgp = fit_vector_gp(design, expansion.coefficients, cfg.gp, cfg.run.threads)
    return expansion, vgp


def stored_surrogates(cfg):
    """(BasisExpansion, VectorGp) saved by the fit command under cfg.surrogates_dir."""
    vgp, expansion = load_surrogates(cfg.surrogates_dir)
    names = tuple(vgp.design.space.names)
    if names != tuple(cfg.space.names):
        raise ConfigError(
            f"stored surrogates take inputs {list(names)}, the configuration declares {list(cfg.space.names)}", cfg.path
        )
    logger.info("reusing %d surrogates from %s", len(vgp), cfg.surrogates_dir)
    return expansion, vgp


def check_memory(cfg, run, p):
    locations = (3 if run.needs_total_locations else 2) * run.n_pf
    needed = batch_memory_mb(p, run.n_z, locations)
    if run.mode is SamplingMode.BATCH and needed > cfg.memory_budget_mb:
        logger.warning(
            "batch sampling stores %.0f MiB of trajectories (budget %.0f MiB); consider --mode per-trajectory",
            needed,
            cfg.memory_budget_mb,
        )
    return needed


def analyze(vgp, expansion, cfg, run=None, watch=None):
    """Error-quantified indices of every configured index set, as DistributionReports."""
    run = run or cfg.run
    check_memory(cfg, run, expansion.n_components)
    coordinates = expansion.grid if expansion.grid is not None else np.arange(expansion.width, dtype=float)
    reports = []
    for index_set in run.variables:
        label = index_set.label(cfg.space.names)
        start = time.perf_counter()
        distributions = run_algorithm3(vgp, expansion, cfg.space, index_set, run)
        if watch is not None:
            watch.timings[f"analysis:{label}"] = time.perf_counter() - start
        for kind in run.kinds:
            report = DistributionReport(distributions[kind], label, coordinates)
            flagged = sum(row["out_of_range"] for row in report.gsi_sample_rows())
            if flagged:
                logger.warning("%s (%s): %d GSI samples fall outside [0, 1] beyond noise", label, kind.value, flagged)
            reports.append(report)
    return reports


def write_run_tables(reports, out_dir):
    names = []
    for name, frame in run_tables(reports).items():
        write_table(frame, os.path.join(out_dir, name))
        names.append(name)
    return names


def run_pipeline(cfg):
    """Fit, analyze and write maps_summary, gsi_summary, gsi_samples, attribution and manifest."""
    watch = Stopwatch()
    if cfg.surrogates_dir:
        with watch.stage("surrogates"):
            expansion, vgp = stored_surrogates(cfg)
    else:
        with watch.stage("data"):
            design, outputs = load_data(cfg)
        with watch.stage("surrogates"):
            expansion, vgp = fit_surrogates(design, outputs, cfg)
    with watch.stage("analysis"):
        reports = analyze(vgp, expansion, cfg, watch=watch)
    artifacts = write_run_tables(reports, cfg.output_dir)
    return write_manifest(
        cfg.output_dir,
        "run",
        cfg.to_dict(),
        seed_streams(cfg.run.seed),
        watch.timings,
        artifacts,
        {"basis": {"components": expansion.n_components, "explained_ratio": expansion.explained_ratio}},
    )


def _doe_sweep(cfg, watch):
    if cfg.surrogates_dir:
        logger.warning("the DoE-size sweep refits its surrogates; %s is not used for it", cfg.surrogates_dir)
    sizes = cfg.doe_sizes
    if cfg.source == "csv":
        design, outputs = load_data(cfg)
    else:
        design, outputs = load_data(cfg, n=max(sizes))
    if max(sizes) > design.size:
        raise ConfigError(f"[sweep] doe_sizes go up to {max(sizes)} but the design has {design.size} rows", cfg.path)
    rows, artifacts = [], []
    for size in sizes:
        with watch.stage(f"doe:{size}"):
            expansion, vgp = fit_surrogates(design.head(size), outputs.head(size), cfg)
            reports = analyze(vgp, expansion, cfg)
        subdir = f"doe-{size}"
        artifacts += [f"{subdir}/{name}" for name in write_run_tables(reports, os.path.join(cfg.output_dir, subdir))]
        rows += sweep_rows("doe_size", size, reports)
    return rows, artifacts


def _pf_sweep(cfg, watch):
    with watch.stage("surrogates"):
        if cfg.surrogates_dir:
            expansion, vgp = stored_surrogates(cfg)
        else:
            expansion, vgp = fit_surrogates(*load_data(cfg), cfg)
    rows, artifacts = [], []
    for n_pf in cfg.n_pf_values:
        with watch.stage(f"n_pf:{n_pf}"):
            reports = analyze(vgp, expansion, cfg, run=cfg.run.replace(n_pf=n_pf))
        subdir = f"n_pf-{n_pf}"
        artifacts += [f"{subdir}/{name}" for name in write_run_tables(reports, os.path.join(cfg.output_dir, subdir))]
        rows += sweep_rows("n_pf", n_pf, reports)
    return rows, artifacts


def sweep_pipeline(cfg):
    """
    One run per DoE size (nested prefixes of one master design) and per n_PF value,
    sharing the master seed, plus the long-format table sweep_boxplots.csv.
    """
    if not cfg.doe_sizes and not cfg.n_pf_values:
        raise ConfigError("[sweep] needs doe_sizes or n_pf_values", cfg.path)
    watch = Stopwatch()
    rows, artifacts = [], []
    if cfg.doe_sizes:
        part_rows, part_artifacts = _doe_sweep(cfg, watch)
        rows += part_rows
        artifacts += part_artifacts
    if cfg.n_pf_values:
        part_rows, part_artifacts = _pf_sweep(cfg, watch)
        rows += part_rows
        artifacts += part_artifacts
    write_table(pd.DataFrame(rows), os.path.join(cfg.output_dir, "sweep_boxplots.csv"))
    artifacts.append("sweep_boxplots.csv")
    return write_manifest(cfg.output_dir, "sweep", cfg.to_dict(), seed_streams(cfg.run.seed), watch.timings, artifacts)


def validation_split(cfg, size):
    """(training rows, validation rows) of a design of ``size`` rows."""
    if cfg.validation_count is not None:
        validation = list(range(size - cfg.validation_count, size))
    elif cfg.validation_indices:
        validation = list(cfg.validation_indices)
    else:
        raise ConfigError("[validation] needs 'count' or 'indices'", cfg.path)
    if min(validation) < 0 or max(validation) >= size:
        raise ConfigError(f"[validation] rows must lie in [0, {size - 1}]", cfg.path)
    if cfg.validation_training:
        training = list(cfg.validation_training)
        if max(training) >= size:
            raise ConfigError(f"[validation] training rows must lie in [0, {size - 1}]", cfg.path)
    else:
        held_out = set(validation)
        training = [row for row in range(size) if row not in held_out]
    if set(training) & set(validation):
        raise ConfigError("[validation] training and validation rows overlap", cfg.path)
    if len(training) < 2:
        raise ConfigError("[validation] leaves fewer than 2 training rows", cfg.path)
    return training, validation


def check_held_out(fitted, design, validation, cfg):
    """Refuse validation rows that the stored surrogates were conditioned on."""
    held_out = design.take(validation)
    seen = np.any(np.all(np.isclose(held_out.points[:, None, :], fitted.points[None, :, :]), axis=2), axis=1)
    if np.any(seen):
        rows = [validation[i] for i in np.flatnonzero(seen)]
        raise ConfigError(f"validation rows {rows} are design points of the stored surrogates", cfg.path)


def validate_pipeline(cfg):
    """
    Fit on the training rows, or reuse stored surrogates, and write Q2 percentile
    curves of the held-out rows.
    """
    watch = Stopwatch()
    with watch.stage("data"):
        design, outputs = load_data(cfg)
    training, validation = validation_split(cfg, design.size)
    with watch.stage("surrogates"):
        if cfg.surrogates_dir:
            expansion, vgp = stored_surrogates(cfg)
            check_held_out(vgp.design, design, validation, cfg)
        else:
            expansion, vgp = fit_surrogates(design.take(training), outputs.take(training), cfg)
    with watch.stage("validation"):
        report = q2_trajectory_report(
            vgp,
            expansion,
            design.take(validation),
            outputs.take(validation),
            cfg.validation_n_z,
            cfg.run.seed,
            cfg.run.mode,
        )
    percentiles, samples = q2_tables(report)
    write_table(percentiles, os.path.join(cfg.output_dir, "q2_percentiles.csv"))
    write_table(samples, os.path.join(cfg.output_dir, "q2_samples.csv"))
    return write_manifest(
        cfg.output_dir,
        "validate",
        cfg.to_dict(),
        seed_streams(cfg.run.seed),
        watch.timings,
        ["q2_percentiles.csv", "q2_samples.csv"],
        {"split": {"training": training, "validation": validation}},
    )


def fit_pipeline(cfg):
    """Fit the basis and surrogates only and persist them under <out>/surrogates."""
    watch = Stopwatch()
    with watch.stage("data"):
        design, outputs = load_data(cfg)
    with watch.stage("surrogates"):
        expansion, vgp = fit_surrogates(design, outputs, cfg)
    directory = os.path.join(cfg.output_dir, "surrogates")
    save_surrogates(vgp, expansion, directory)
    artifacts = [
        os.path.relpath(os.path.join(root, name), cfg.output_dir)
        for root, _, files in os.walk(directory)
        for name in files
    ]
    return write_manifest(cfg.output_dir, "fit", cfg.to_dict(), seed_streams(cfg.run.seed), watch.timings, artifacts)


def bench_workload(options, seed):
    """Random pre-sampled trajectories, an orthonormal basis and per-trajectory bootstrap rows."""
    rng = make_rng(derive_seed(seed, STREAM_BENCH))
    trajectories = rng.standard_normal((options.n_z, 2 * options.n_pf, options.components))
    basis, _ = np.linalg.qr(rng.standard_normal((options.grid_size, options.components)))
    rows = trajectory_bootstrap(options.n_pf, options.n_x, seed, STREAM_BENCH)
    return trajectories, basis.T, rows


def bench_pipeline(cfg):
    """
    Time and count the flops of basis-derived against dimension-wise estimation on
    identical pre-sampled trajectories (sampling excluded), next to the flop model.
    """
    options = cfg.bench
    trajectories, components, rows = bench_workload(options, cfg.run.seed)
    index_set = IndexSet((0,), 1)
    gram = components @ components.T
    counter = OperationCounter()

    start = time.perf_counter()
    basis_derived = estimate_from_trajectories(
        trajectories, components, gram, options.n_pf, rows, index_set, counter=counter
    )
    time_bd = time.perf_counter() - start
    start = time.perf_counter()
    dimensionwise = estimate_dimensionwise_from_trajectories(
        trajectories, components, options.n_pf, rows, index_set, counter=counter
    )
    time_dw = time.perf_counter() - start

    first, second = next(iter(basis_derived.values())), next(iter(dimensionwise.values()))
    cost_dw, cost_bd, bound = predicted_costs(options.components, options.n_pf, options.grid_size)
    report = {
        "workload": options.to_dict(),
        "seconds_basis_derived": time_bd,
        "seconds_dimensionwise": time_dw,
        "measured_speedup": time_dw / time_bd if time_bd > 0 else float("inf"),
        "operations_basis_derived": counter.per_replicate(BASIS_DERIVED),
        "operations_dimensionwise": counter.per_replicate(DIMENSIONWISE),
        "measured_operation_ratio": counter.ratio(),
        "predicted_cost_dimensionwise": cost_dw,
        "predicted_cost_basis_derived": cost_bd,
        "predicted_ratio": cost_dw / cost_bd,
        "ratio_lower_bound": bound,
        "max_map_difference": float(np.nanmax(np.abs(first.maps - second.maps))),
    }
    logger.info(
        "bench: dimension-wise %.3fs, basis-derived %.3fs, speedup %.1f, flop ratio %.1f (predicted %.1f, bound %.1f)",
        time_dw,
        time_bd,
        report["measured_speedup"],
        report["measured_operation_ratio"],
        report["predicted_ratio"],
        bound,
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "bench.json"), "w") as f:
        json.dump(report, f, indent=2)
    return write_manifest(
        cfg.output_dir,
        "bench",
        cfg.to_dict(),
        seed_streams(cfg.run.seed),
        {"basis_derived": time_bd, "dimensionwise": time_dw},
        ["bench.json"],
        {"bench": report},
    )
