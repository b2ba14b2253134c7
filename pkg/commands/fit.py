# fit command: basis and surrogates only

import click

from commands import pipeline_options
from services.pipeline import fit_pipeline


@click.command("fit")
@pipeline_options
def fit(cfg):
    """Fit the basis and coefficient surrogates and save them."""
    fit_pipeline(cfg)
    click.echo(f"saved surrogates to {cfg.output_dir}/surrogates")
