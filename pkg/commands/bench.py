# bench command: basis-derived vs dimension-wise timings

import click

from commands import pipeline_options
from services.pipeline import bench_pipeline


@click.command("bench")
@pipeline_options
def bench(cfg):
    """Time both estimation strategies on pre-sampled trajectories."""
    report = bench_pipeline(cfg)["bench"]
    click.echo(
        f"dimension-wise {report['seconds_dimensionwise']:.3f}s, basis-derived {report['seconds_basis_derived']:.3f}s, "
        f"speedup {report['measured_speedup']:.1f} (predicted {report['predicted_ratio']:.1f}, "
        f"lower bound {report['ratio_lower_bound']:.1f})"
    )
