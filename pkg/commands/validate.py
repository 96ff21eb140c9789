"""
validate: oracle cross-validation, formula arbitration and the Monte Carlo bound suite.

Exit status: 0 when everything holds, 2 on any Cramer-Rao ordering or
Monte Carlo bound violation, 3 when the Gaussian QFI disagrees with the
Fock oracle and 4 when a Monte Carlo variance misses its predicted CRB by
more than the saturation tolerance. The JSON report is written either way.
"""

import json
import logging

import click

from discrepancy import GRIDS, build_discrepancy_report, evaluate_grid, grid_points
from montecarlo import run_plan, validation_plans
from results import json_ready

from .common import domain_errors, seed_option, threads_option

logger = logging.getLogger(__name__)

EXIT_BOUND_VIOLATION = 2
EXIT_ORACLE_MISMATCH = 3
EXIT_CRB_NOT_SATURATED = 4

MC_TRIALS = {"small": 100_000, "smoke": 20_000}
DEFAULT_SEED = 20240601


def run_montecarlo_suite(trials, seed, threads=1):
    entries = []
    for plan in validation_plans(trials, seed):
        result, verdict, report = run_plan(plan, threads=threads)
        deviation = result.empirical_variance / result.predicted_variance - 1.0
        entries.append({
            "scheme": plan.scheme,
            "s": plan.probe.s,
            "photons": plan.probe.photons,
            "trials": plan.trials,
            "result": result.to_dict(),
            "verdict": verdict.to_dict(),
            "qfi": report.qfi_numerical,
            "prediction_relative_error": abs(deviation),
        })
        logger.info("MC %s s=%g: %s (var/pred - 1 = %.3g)", plan.scheme, plan.probe.s,
                    verdict.message, deviation)
    return entries


def run_validate(scale="small", threads=1, seed=DEFAULT_SEED, trials=None):
    """Full validation report as a plain dict."""
    records = evaluate_grid(grid_points(scale), threads)
    report = build_discrepancy_report(records)
    suite = run_montecarlo_suite(trials or MC_TRIALS[scale], seed, threads)
    report["montecarlo"] = {
        "seed": seed,
        "passed": all(entry["verdict"]["respected"] for entry in suite),
        "saturated": all(entry["verdict"]["crb_saturated"] for entry in suite),
        "runs": suite,
    }
    report["scale"] = scale
    report["bounds_respected"] = report["qcrb_chain"]["passed"] and report["montecarlo"]["passed"]
    return report


def exit_status(report) -> int:
    if not report["bounds_respected"]:
        return EXIT_BOUND_VIOLATION
    if not report["cross_validation"]["passed"]:
        return EXIT_ORACLE_MISMATCH
    if not report["montecarlo"]["saturated"]:
        return EXIT_CRB_NOT_SATURATED
    return 0


@click.command("validate")
@threads_option
@seed_option
@click.option("--scale", type=click.Choice(sorted(GRIDS)), default="small", show_default=True)
@click.option("--trials", type=click.IntRange(min=2), default=None,
              help="Monte Carlo trials per plan (default depends on --scale).")
@click.option("--out", "out", type=click.Path(dir_okay=False, writable=True),
              default="validation_report.json", show_default=True)
@domain_errors
def validate_command(threads, seed, scale, trials, out):
    """Cross-check the Gaussian engine against the Fock oracle and the bounds."""
    report = run_validate(scale, threads, DEFAULT_SEED if seed is None else seed, trials)
    with open(out, "w", encoding="utf-8") as handle:
        json.dump(json_ready(report), handle, indent=2, sort_keys=True, allow_nan=False)

    for tension in report["tensions"]:
        click.echo(f"{tension['name']}: {tension['verdict']} ({tension['points']} points)")
    cross = report["cross_validation"]
    click.echo(f"oracle agreement: {cross['points']} points, max relative error {cross['max_relative_error']:.3g}")
    click.echo("bounds respected" if report["bounds_respected"] else "BOUND VIOLATION")
    if not report["montecarlo"]["saturated"]:
        click.echo("Monte Carlo variance missed the predicted CRB", err=True)
    click.echo(f"report written to {out}")

    status = exit_status(report)
    if status:
        click.get_current_context().exit(status)
