# shared options of the pipeline commands

import functools

import click

from config import load_pipeline_config
from models import CovarianceMode, SamplingMode


def pipeline_options(command):
    """--config, --out, --seed, --threads, --mode and --covariance."""

    @click.option(
        "--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Pipeline INI file."
    )
    @click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory.")
    @click.option("--seed", type=click.IntRange(min=0), help="Master seed.")
    @click.option("--threads", type=click.IntRange(min=1), help="Worker threads.")
    @click.option("--mode", type=click.Choice([mode.value for mode in SamplingMode]), help="Trajectory sampling mode.")
    @click.option(
        "--covariance",
        type=click.Choice([mode.value for mode in CovarianceMode]),
        help="Overall covariance used by the indices.",
    )
    @functools.wraps(command)
    def wrapper(config_path, output_dir, seed, threads, mode, covariance, **kwargs):
        cfg = load_pipeline_config(
            config_path, seed=seed, threads=threads, mode=mode, covariance=covariance, output_dir=output_dir
        )
        return command(cfg, **kwargs)

    return wrapper


def surrogates_option(command):
    """--surrogates: reuse the surrogates saved by ``fit`` instead of fitting new ones."""

    @click.option(
        "--surrogates",
        "surrogates_dir",
        type=click.Path(exists=True, file_okay=False),
        help="Directory written by the fit command.",
    )
    @functools.wraps(command)
    def wrapper(cfg, surrogates_dir, **kwargs):
        if surrogates_dir is not None:
            cfg = cfg.replace(surrogates_dir=surrogates_dir)
        return command(cfg, **kwargs)

    return wrapper
