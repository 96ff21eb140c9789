"""
sucrose: relative precision for a dilute sucrose solution.

Prints the unit audit (every intermediate of the rotation model), the
relative precision dC/C for a coherent and a squeezed probe, and the quoted
literature values with the factor by which the computed ones deviate.
"""

import logging
import math
from dataclasses import replace

import click

from metrology import qfi_closed_form_birefringence
from models import ProbeFamily
from results import ResultTable

from .common import config_option, domain_errors, emit, output_options, resolve_scenario

logger = logging.getLogger(__name__)

# Quoted literature values for the 1% w/w solution at 10^9 photons.
LITERATURE_RELATIVE_PRECISION = {"coherent": 0.016, "squeezed": 0.008}

SUCROSE_COLUMNS = (
    "probe", "s", "photons", "qfi", "sql", "delta_C", "relative_precision",
    "literature_relative_precision", "deviation_factor",
)


def sucrose_audit(scenario):
    sample, probe = scenario.sample, scenario.probe
    return {
        "delta_gamma": sample.delta_gamma,
        "concentration": sample.concentration,
        "concentration_unit": sample.concentration_unit,
        "path_length_dm": sample.path_length_dm,
        "delta_gamma_times_l": sample.phase_rate,
        "delta_phi": sample.phase_rate * sample.concentration,
        "alpha": probe.alpha,
        "photons": probe.photons,
        "eta": sample.eta,
    }


def run_sucrose(scenario) -> ResultTable:
    """Coherent and squeezed rows, plus their precision ratio in the table name."""
    squeezed = scenario.probe
    if squeezed.family is ProbeFamily.COHERENT:
        raise ValueError("sucrose comparison needs a squeezed probe (s > 0)")
    probes = {"coherent": squeezed.coherent_counterpart(), "squeezed": squeezed}
    concentration = scenario.sample.concentration
    if concentration <= 0:
        raise ValueError("relative precision needs a positive concentration")

    table = ResultTable(columns=SUCROSE_COLUMNS, name="sucrose")
    for label, probe in probes.items():
        report = qfi_closed_form_birefringence(probe, scenario.sample, scenario.common_phase)
        delta = 1.0 / math.sqrt(report.qfi_closed_form)
        relative = delta / concentration
        literature = LITERATURE_RELATIVE_PRECISION[label]
        table.add_row(
            probe=label,
            s=probe.s,
            photons=probe.photons,
            qfi=report.qfi_closed_form,
            sql=report.sql,
            delta_C=delta,
            relative_precision=relative,
            literature_relative_precision=literature,
            deviation_factor=relative / literature,
        )
    return table


def precision_ratio(table) -> float:
    """Coherent over squeezed dC (about 2 at s = 1)."""
    coherent, squeezed = table.column("relative_precision")
    return coherent / squeezed


@click.command("sucrose")
@config_option
@output_options
@click.option("--s", "squeezing", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="Override the squeezing factor of the probe.")
@click.option("--photons", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="Override |alpha|^2.")
@domain_errors
def sucrose_command(config_path, out, fmt, squeezing, photons):
    """Relative precision for 1% sucrose, coherent versus squeezed."""
    scenario = resolve_scenario(config_path, "birefringence")
    probe = scenario.probe
    if squeezing is not None:
        probe = replace(probe, family=ProbeFamily.POLARIZATION_SQUEEZED, s=squeezing)
    if photons is not None:
        probe = replace(probe, alpha=math.sqrt(photons))
    scenario = replace(scenario, probe=probe)

    click.echo("Unit audit:")
    for key, value in sucrose_audit(scenario).items():
        click.echo(f"  {key:22s} {value!r}")

    table = run_sucrose(scenario)
    for row in table.rows:
        click.echo(
            f"{row['probe']:>9s}: dC/C = {row['relative_precision']:.6g} "
            f"(literature {row['literature_relative_precision']:g}, x{row['deviation_factor']:.3f})"
        )
    ratio = precision_ratio(table)
    click.echo(f"precision ratio coherent/squeezed = {ratio:.6g} (squeezed/coherent = {1.0 / ratio:.6g})")
    if out:
        emit(table, out, fmt)
