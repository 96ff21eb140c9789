"""
ChiralQ command line

    python cli.py qfi --config scenario.json --out qfi.csv
    python cli.py enhancement --out enhancement.csv
    python cli.py sucrose
    python cli.py dichroism --format json
    python cli.py simulate --seed 7 --trials 100000
    python cli.py validate --scale smoke
"""

import logging
import os

import click

from app_config import Config
from commands import (
    dichroism_command,
    enhancement_command,
    qfi_command,
    simulate_command,
    sucrose_command,
    validate_command,
)

logger = logging.getLogger("chiralq.cli")

# ---------------------------------------------------------------------------
# Sentry error monitoring (optional -- only active when SENTRY_DSN is set)
# ---------------------------------------------------------------------------
_sentry_dsn = Config.SENTRY_DSN
if _sentry_dsn:
    import sentry_sdk
    sentry_sdk.init(
        dsn=_sentry_dsn,
        environment=Config.ENVIRONMENT,
        traces_sample_rate=0.0,
    )


@click.group()
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Overrides CHIRALQ_LOG_LEVEL.")
def cli(log_level):
    """Concentration estimation of chiral analytes with quantum light."""
    level = (log_level or Config.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug("Log level %s (pid %d)", level, os.getpid())


cli.add_command(qfi_command)
cli.add_command(enhancement_command)
cli.add_command(sucrose_command)
cli.add_command(dichroism_command)
cli.add_command(simulate_command)
cli.add_command(validate_command)


if __name__ == "__main__":
    cli()
