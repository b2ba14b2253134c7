# validate command: Q2 of the surrogate on held-out rows

import click

from commands import pipeline_options, surrogates_option
from services.pipeline import validate_pipeline


@click.command("validate")
@pipeline_options
@surrogates_option
def validate(cfg):
    """Hold out the [validation] rows and report Q2 percentile curves."""
    validate_pipeline(cfg)
    click.echo(f"wrote q2_percentiles.csv and q2_samples.csv to {cfg.output_dir}")
