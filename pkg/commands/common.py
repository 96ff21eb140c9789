"""
Shared options and plumbing for the subcommands.
"""

import functools
import logging
from concurrent.futures import ThreadPoolExecutor

import click

from app_config import Config
from results import FORMATS
from scenario import default_scenario, load_scenario

logger = logging.getLogger(__name__)


def output_options(func):
    func = click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)(func)
    return click.option("--out", "out", type=click.Path(dir_okay=False, writable=True),
                        help="Write the table here instead of standard output.")(func)


def config_option(func):
    return click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                        help="Scenario JSON file.")(func)


def threads_option(func):
    return click.option("--threads", type=click.IntRange(min=1), default=Config.DEFAULT_THREADS,
                        show_default=True, help="Worker threads for sweep points.")(func)


def seed_option(func):
    return click.option("--seed", type=int, default=None,
                        help="Random seed (overrides measurement.seed).")(func)


def domain_errors(func):
    """Turn library validation errors into clean CLI failures (exit 1)."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.exceptions.Abort):
            raise
        except (ValueError, RuntimeError) as exc:
            logger.debug("Command failed", exc_info=True)
            raise click.ClickException(str(exc))
    return wrapper


def resolve_scenario(config_path, mode):
    scenario = load_scenario(config_path) if config_path else default_scenario(mode)
    if scenario.mode != mode:
        raise click.UsageError(f"this command needs a {mode} scenario, got {scenario.mode!r}")
    return scenario


def map_points(func, points, threads=1):
    """Evaluate sweep points, optionally in threads; results keep point order."""
    def guarded(point):
        try:
            return func(point)
        except Exception:
            logger.exception("Sweep point %r failed", point[0] if isinstance(point, tuple) else point)
            raise

    if threads <= 1 or len(points) <= 1:
        return [guarded(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, points))


def emit(table, out, fmt):
    if out:
        table.write(out, fmt)
        click.echo(f"Wrote {len(table.rows)} rows to {out}", err=True)
    else:
        click.echo(table.render(fmt), nl=False)
