"""
dichroism: ratio-estimator variance of the twin probe versus transmission and squeezing.
"""

import logging
import math

import click

from channels import transmissions_from_sample
from metrology import dichroism_precision_ratio, dichroism_variance_factor
from results import ResultTable
from scenario import load_scenario

from .common import config_option, domain_errors, emit, map_points, output_options, threads_option

logger = logging.getLogger(__name__)

DICHROISM_COLUMNS = (
    "T_L", "T_R", "s", "eta", "variance_over_beta", "coherent_over_beta",
    "precision_ratio", "asymptotic_ratio",
)
DEFAULT_TRANSMISSIONS = (0.9, 0.95, 0.99)
DEFAULT_SQUEEZING = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0)


def asymptotic_ratio(T_L, T_R, eta=1.0) -> float:
    """Precision ratio for s -> infinity at the amplitude-squeezed angle."""
    coherent = 1.0 / (eta * T_L) + 1.0 / (eta * T_R)
    limit = coherent - 2.0
    return math.inf if limit <= 0.0 else math.sqrt(coherent / limit)


def dichroism_row(T_L, T_R, s, theta_eff=0.0, eta=1.0):
    return {
        "T_L": T_L,
        "T_R": T_R,
        "s": s,
        "eta": eta,
        "variance_over_beta": dichroism_variance_factor(s, T_L, T_R, theta_eff, eta),
        "coherent_over_beta": dichroism_variance_factor(0.0, T_L, T_R, eta=eta),
        "precision_ratio": dichroism_precision_ratio(s, T_L, T_R, theta_eff, eta),
        "asymptotic_ratio": asymptotic_ratio(T_L, T_R, eta),
    }


def run_dichroism(transmissions=DEFAULT_TRANSMISSIONS, squeezing=DEFAULT_SQUEEZING) -> ResultTable:
    """Built-in grid with equal arm transmissions."""
    table = ResultTable(columns=DICHROISM_COLUMNS, name="dichroism")
    for T in transmissions:
        for s in squeezing:
            table.add_row(**dichroism_row(T, T, s))
    return table


def run_dichroism_scenario(scenario, threads=1) -> ResultTable:
    """One row per sweep point; transmissions follow from the sample."""
    if scenario.mode != "dichroism":
        raise ValueError(f"dichroism needs a dichroism scenario, got {scenario.mode!r}")

    def evaluate(point):
        _, config = point
        trans = transmissions_from_sample(config.sample)
        return dichroism_row(trans.T_L, trans.T_R, config.probe.s, config.probe.theta_eff, config.sample.eta)

    table = ResultTable(columns=DICHROISM_COLUMNS, name="dichroism")
    for row in map_points(evaluate, scenario.points(), threads):
        table.add_row(**row)
    return table


@click.command("dichroism")
@config_option
@output_options
@threads_option
@click.option("--transmission", "transmissions", type=click.FloatRange(0.0, 1.0, min_open=True),
              multiple=True, help="Arm transmission T for the built-in grid (repeatable).")
@click.option("--s", "squeezing", type=click.FloatRange(min=0.0), multiple=True,
              help="Squeezing factor for the built-in grid (repeatable).")
@domain_errors
def dichroism_command(config_path, out, fmt, threads, transmissions, squeezing):
    """Squeezed-to-coherent precision ratio for circular dichroism."""
    if config_path:
        table = run_dichroism_scenario(load_scenario(config_path), threads)
    else:
        table = run_dichroism(tuple(transmissions) or DEFAULT_TRANSMISSIONS,
                              tuple(squeezing) or DEFAULT_SQUEEZING)
    emit(table, out, fmt)
