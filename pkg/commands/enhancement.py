"""
enhancement: birefringence precision gain versus squeezing and efficiency.

The enhancement is the square root of (bright term / SQL) at delta_phi = 0,
the dilute limit where the vacuum term is negligible. A second column adds
the vacuum term back at a finite photon number.
"""

import logging
import math

import click
import numpy as np

from gaussian_core import squeezing_db
from metrology import bright_term, standard_quantum_limit, vacuum_term
from models import SUCROSE_PHOTONS
from results import ResultTable

from .common import domain_errors, emit, output_options

logger = logging.getLogger(__name__)

ENHANCEMENT_COLUMNS = ("s", "eta", "squeezing_db", "enhancement", "enhancement_with_vacuum")
DEFAULT_ETAS = (1.0, 0.95, 0.9, 0.8)
S_STEP = 0.01
S_MAX = 1.8


def squeezing_grid():
    count = int(round(S_MAX / S_STEP)) + 1
    return [round(float(s), 10) for s in np.linspace(0.0, S_MAX, count)]


def enhancement(s, eta, photons=None) -> float:
    """Precision gain over the coherent probe; dilute limit when photons is None."""
    # rate cancels in every ratio, so unit rate is used
    sql = standard_quantum_limit(1.0, eta, 1.0)
    gain = bright_term(1.0, s, eta, 1.0, 0.0) / sql
    if photons is not None:
        gain += vacuum_term(s, eta, 1.0) / (photons * sql)
    return math.sqrt(gain)


def run_enhancement(photons=SUCROSE_PHOTONS, etas=DEFAULT_ETAS, s_values=None) -> ResultTable:
    table = ResultTable(columns=ENHANCEMENT_COLUMNS, name="enhancement")
    s_values = squeezing_grid() if s_values is None else s_values
    for eta in etas:
        for s in s_values:
            table.add_row(
                s=s,
                eta=eta,
                squeezing_db=squeezing_db(s),
                enhancement=enhancement(s, eta),
                enhancement_with_vacuum=enhancement(s, eta, photons),
            )
    return table


@click.command("enhancement")
@output_options
@click.option("--photons", type=click.FloatRange(min=0.0, min_open=True), default=SUCROSE_PHOTONS,
              show_default=True, help="|alpha|^2 for the enhancement_with_vacuum column.")
@click.option("--eta", "etas", type=click.FloatRange(0.0, 1.0, min_open=True), multiple=True,
              help="Efficiencies to tabulate (repeatable).")
@domain_errors
def enhancement_command(out, fmt, photons, etas):
    """Enhancement table over s in [0, 1.8] for several efficiencies."""
    table = run_enhancement(photons, tuple(etas) or DEFAULT_ETAS)
    logger.info("Enhancement table: %d rows", len(table.rows))
    emit(table, out, fmt)
