# sweep command: DoE-size and pick-freeze-size sweeps

import click

from commands import pipeline_options, surrogates_option
from services.pipeline import sweep_pipeline


@click.command("sweep")
@pipeline_options
@surrogates_option
def sweep(cfg):
    """Repeat the run over the [sweep] DoE sizes and n_pf values."""
    manifest = sweep_pipeline(cfg)
    click.echo(f"wrote {len(manifest['artifacts'])} artifacts to {cfg.output_dir}")
