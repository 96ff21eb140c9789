"""
simulate: Monte Carlo run of the scenario's measurement block.
"""

import logging
from dataclasses import replace

import click

from montecarlo import OUTCOME_MODELS, run_plan
from results import ResultTable
from scenario import default_scenario, load_scenario

from .common import config_option, domain_errors, emit, output_options, seed_option, threads_option

logger = logging.getLogger(__name__)

EXIT_BOUND_VIOLATION = 2

SIMULATE_COLUMNS = (
    "parameter", "value", "scheme", "outcome_model", "trials", "seed", "estimate", "true_value",
    "empirical_variance", "variance_se", "bias", "bias_se", "predicted_variance", "crb", "qcrb",
    "respected", "crb_saturated", "qcrb_saturated", "verdict",
)


def run_simulate(scenario, threads=1):
    """Returns (table, all_respected); sweep points run in order, trials in threads."""
    parameter = scenario.sweep.parameter if scenario.sweep else None
    table = ResultTable(columns=SIMULATE_COLUMNS, name="simulate")
    all_respected = True
    for value, config in scenario.points():
        plan = config.plan()
        result, verdict, _ = run_plan(plan, threads=threads)
        all_respected = all_respected and verdict.respected
        table.add_row(
            parameter=parameter,
            value=value,
            scheme=plan.scheme,
            outcome_model=plan.outcome_model,
            trials=plan.trials,
            seed=plan.seed,
            estimate=result.estimate,
            true_value=result.true_value,
            empirical_variance=result.empirical_variance,
            variance_se=result.variance_se,
            bias=result.bias,
            bias_se=result.bias_se,
            predicted_variance=result.predicted_variance,
            crb=result.crb,
            qcrb=result.qcrb,
            respected=verdict.respected,
            crb_saturated=verdict.crb_saturated,
            qcrb_saturated=verdict.qcrb_saturated,
            verdict=verdict.message,
        )
    return table, all_respected


@click.command("simulate")
@config_option
@output_options
@threads_option
@seed_option
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Override measurement.nu.")
@click.option("--model", "outcome_model", type=click.Choice(OUTCOME_MODELS), default=None,
              help="Override measurement.outcome_model.")
@click.option("--mode", type=click.Choice(["birefringence", "dichroism"]), default="birefringence",
              show_default=True, help="Built-in scenario to use when no --config is given.")
@domain_errors
def simulate_command(config_path, out, fmt, threads, seed, trials, outcome_model, mode):
    """Sample outcomes, estimate C and check the Cramer-Rao chain."""
    scenario = load_scenario(config_path) if config_path else default_scenario(mode)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if trials is not None:
        overrides["nu"] = trials
    if outcome_model is not None:
        overrides["outcome_model"] = outcome_model
    if overrides:
        scenario = replace(scenario, measurement=replace(scenario.measurement, **overrides))

    table, respected = run_simulate(scenario, threads)
    emit(table, out, fmt)
    if not respected:
        click.echo("Empirical variance fell below the quantum Cramer-Rao bound", err=True)
        click.get_current_context().exit(EXIT_BOUND_VIOLATION)
