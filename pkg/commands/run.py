# run command: error-quantified sensitivity maps and GSI

import click

from commands import pipeline_options, surrogates_option
from services.pipeline import run_pipeline


@click.command("run")
@pipeline_options
@surrogates_option
def run(cfg):
    """Fit (or reuse with --surrogates) the surrogates and estimate every configured index set."""
    manifest = run_pipeline(cfg)
    click.echo(f"wrote {len(manifest['artifacts'])} artifacts to {cfg.output_dir}")
