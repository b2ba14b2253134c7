import logging
import sys

import click

from config import VERSION, setup_logging
from models import SensimapError

logger = logging.getLogger("sensimap")

EXIT_OK = 0
EXIT_CONFIG = 1


class SensimapGroup(click.Group):
    """Command group mapping failures to exit codes: 1 configuration, 2 numerical."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as error:
            error.show()
            code = EXIT_CONFIG
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_CONFIG
        except SensimapError as error:
            logger.error("%s: %s", type(error).__name__, error)
            code = error.exit_code
        code = EXIT_OK if code is None else code
        if not standalone_mode:
            return code
        sys.exit(code)


@click.group(cls=SensimapGroup)
@click.version_option(VERSION, prog_name="sensimap")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.option("--log-config", type=click.Path(dir_okay=False), help="logging.fileConfig document.")
def cli(log_level, log_config):
    """Sensitivity maps of functional outputs with metamodel and estimation error bars."""
    setup_logging(log_level, log_config)


from commands.run import run
from commands.sweep import sweep
from commands.bench import bench
from commands.validate import validate
from commands.fit import fit

cli.add_command(run)
cli.add_command(sweep)
cli.add_command(bench)
cli.add_command(validate)
cli.add_command(fit)


def main():
    cli(prog_name="sensimap")


if __name__ == "__main__":
    main()
