"""
qfi: QFI terms, bounds and advantages over a scenario sweep.
"""

import logging

import click

from metrology import qfi_closed_form_birefringence, qfi_dichroism
from results import ResultTable
from scenario import default_scenario, load_scenario

from .common import config_option, domain_errors, emit, map_points, output_options, threads_option

logger = logging.getLogger(__name__)

QFI_COLUMNS = (
    "parameter", "value", "s", "eta", "photons", "qfi_numerical", "qfi_closed_form",
    "vacuum_term", "bright_term", "bright_term_printed", "sql", "advantage_qfi",
    "advantage_precision", "advantage_numerical", "qcrb",
)


def run_qfi(scenario, threads=1) -> ResultTable:
    """One row per sweep point."""
    parameter = scenario.sweep.parameter if scenario.sweep else None

    def evaluate(point):
        value, config = point
        if config.mode == "birefringence":
            report = qfi_closed_form_birefringence(config.probe, config.sample, config.common_phase,
                                                   config.measurement.nu)
        else:
            report = qfi_dichroism(config.probe, config.sample, config.measurement.nu)
        return value, config, report

    table = ResultTable(columns=QFI_COLUMNS, name="qfi")
    for value, config, report in map_points(evaluate, scenario.points(), threads):
        table.add_row(
            parameter=parameter,
            value=value,
            s=config.probe.s,
            eta=config.sample.eta,
            photons=config.probe.photons,
            qfi_numerical=report.qfi_numerical,
            qfi_closed_form=report.qfi_closed_form,
            vacuum_term=report.vacuum_term,
            bright_term=report.bright_term,
            bright_term_printed=report.bright_term_printed,
            sql=report.sql,
            advantage_qfi=report.advantage_qfi,
            advantage_precision=report.advantage_precision,
            advantage_numerical=report.advantage_numerical,
            qcrb=report.qcrb_variance,
        )
    return table


@click.command("qfi")
@config_option
@output_options
@threads_option
@click.option("--mode", type=click.Choice(["birefringence", "dichroism"]), default=None,
              help="Built-in scenario to use when no --config is given.")
@domain_errors
def qfi_command(config_path, out, fmt, threads, mode):
    """Quantum Fisher information and advantage ratios."""
    scenario = load_scenario(config_path) if config_path else default_scenario(mode or "birefringence")
    logger.info("Computing QFI over %d point(s)", len(scenario.points()))
    emit(run_qfi(scenario, threads), out, fmt)
