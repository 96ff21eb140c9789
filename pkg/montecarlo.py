"""
Monte Carlo estimator validation

Draws detector outcomes for the balanced and intensity-ratio schemes,
inverts them into concentration estimates and checks the empirical
variance against the Cramer-Rao chain.

Trials are split into fixed partitions, each with its own Philox stream
spawned from the plan's seed, so results do not depend on the number of
worker threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app_config import Config
from channels import transmissions_from_sample
from fock_oracle import (
    balanced_response_fock,
    counts_distribution_fock,
    dichroism_family_fock,
)
from metrology import (
    LN10,
    QfiReport,
    balanced_detection_stats,
    dichroism_stats,
    is_bright,
    optimal_xi,
    qfi_closed_form_birefringence,
    qfi_dichroism,
    ratio_estimator_stats,
)
from models import SUCROSE, ChiralSample, ProbeFamily, ProbeSpec

logger = logging.getLogger(__name__)

SCHEMES = ("balanced", "ratio")
OUTCOME_MODELS = ("gaussian-bright", "exact-fock")


class PlanError(ValueError):
    """Raised for plans that cannot be simulated or inverted."""


class BoundViolationError(AssertionError):
    """Empirical variance fell statistically below the quantum bound."""


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPlan:
    probe: ProbeSpec
    sample: ChiralSample
    scheme: str = "balanced"
    trials: int = 1
    seed: Optional[int] = None
    xi: Optional[float] = None
    outcome_model: str = "gaussian-bright"
    common_phase: float = 0.0
    partitions: Optional[int] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise PlanError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.outcome_model not in OUTCOME_MODELS:
            raise PlanError(f"unknown outcome model {self.outcome_model!r}")
        if int(self.trials) < 1:
            raise PlanError(f"trials must be >= 1, got {self.trials!r}")
        object.__setattr__(self, "trials", int(self.trials))

    @property
    def waveplate(self) -> float:
        if self.xi is not None:
            return self.xi
        return optimal_xi(self.sample.phase_rate * self.sample.concentration)

    @property
    def partition_count(self) -> int:
        count = self.partitions or Config.MC_PARTITIONS
        return max(1, min(int(count), self.trials))


@dataclass(frozen=True, eq=False)
class Outcomes:
    """Per-trial detector readings: S values, or (n_L, n_R) rows for the ratio scheme."""

    values: np.ndarray
    scheme: str
    model: str


@dataclass(frozen=True, eq=False)
class EstimationResult:
    estimates: np.ndarray
    estimate: float
    true_value: float
    empirical_mean: float
    empirical_variance: float
    variance_se: float
    bias: float
    bias_se: float
    predicted_variance: float
    crb: float
    qcrb: Optional[float]
    trials: int
    dropped_trials: int = 0

    @property
    def relative_variance_se(self) -> float:
        if self.empirical_variance == 0.0:
            return 0.0
        return self.variance_se / self.empirical_variance

    def to_dict(self):
        return {
            "estimate": self.estimate,
            "true_value": self.true_value,
            "empirical_mean": self.empirical_mean,
            "empirical_variance": self.empirical_variance,
            "variance_se": self.variance_se,
            "bias": self.bias,
            "bias_se": self.bias_se,
            "predicted_variance": self.predicted_variance,
            "crb": self.crb,
            "qcrb": self.qcrb,
            "trials": self.trials,
            "dropped_trials": self.dropped_trials,
        }


@dataclass(frozen=True)
class Verdict:
    respected: bool
    crb_saturated: bool
    qcrb_saturated: bool
    message: str
    empirical_variance: float
    crb: float
    qcrb: float
    margin_sigma: float

    def raise_for_violation(self):
        if not self.respected:
            raise BoundViolationError(
                f"{self.message}: empirical variance {self.empirical_variance!r} vs "
                f"QCRB {self.qcrb!r} ({self.margin_sigma:.2f} sigma below)"
            )

    def to_dict(self):
        return {
            "respected": self.respected,
            "crb_saturated": self.crb_saturated,
            "qcrb_saturated": self.qcrb_saturated,
            "message": self.message,
            "margin_sigma": self.margin_sigma,
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_outcomes(plan: ExperimentPlan, threads=1) -> Outcomes:
    if plan.seed is None:
        raise PlanError("Monte Carlo runs need an explicit seed")
    draw = _gaussian_sampler(plan) if plan.outcome_model == "gaussian-bright" else _fock_sampler(plan)

    sizes = _partition_sizes(plan.trials, plan.partition_count)
    children = np.random.SeedSequence(plan.seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))

    def run(job):
        child, size = job
        return draw(np.random.Generator(np.random.Philox(child)), size)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run, jobs))
    else:
        chunks = [run(job) for job in jobs]
    logger.debug("Sampled %d trials in %d partitions (%s, %s)",
                 plan.trials, len(jobs), plan.scheme, plan.outcome_model)
    return Outcomes(values=np.concatenate(chunks), scheme=plan.scheme, model=plan.outcome_model)


def _gaussian_sampler(plan):
    moments = _scheme_moments(plan)

    def draw(rng, size):
        columns = [rng.normal(mean, math.sqrt(max(var, 0.0)), size) for mean, var in moments]
        return columns[0] if len(columns) == 1 else np.stack(columns, axis=1)

    return draw


def _scheme_moments(plan):
    """(mean, variance) per detected quantity under the bright Gaussian model."""
    probe, sample = plan.probe, plan.sample
    if not is_bright(probe.photons, probe.s):
        raise PlanError(
            f"gaussian-bright model needs |alpha|^2 >> sinh^2(2s); got |alpha|^2={probe.photons:g}, "
            f"s={probe.s:g}. Use the exact-fock model at small scale"
        )
    if plan.scheme == "balanced":
        stats = balanced_detection_stats(probe, sample, plan.waveplate, plan.common_phase)
        return [(stats.mean, stats.variance)]
    left, right = dichroism_stats(probe, transmissions_from_sample(sample), sample.eta, sample)
    return [(left.mean, left.variance), (right.mean, right.variance)]


def _fock_sampler(plan):
    probe, sample = plan.probe, plan.sample
    if plan.scheme == "balanced":
        distribution = balanced_response_fock(probe, sample, plan.waveplate, plan.common_phase).distribution
    else:
        state = dichroism_family_fock(probe, sample)(sample.concentration)
        distribution = counts_distribution_fock(state)
    distribution = distribution.normalized()

    def draw(rng, size):
        return distribution.sample(rng, size).astype(float)

    return draw


def _partition_sizes(trials, partitions):
    base, extra = divmod(trials, partitions)
    return [base + (1 if i < extra else 0) for i in range(partitions)]


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

def estimate_concentration(outcomes: Outcomes, plan: ExperimentPlan,
                           qfi_report: Optional[QfiReport] = None) -> EstimationResult:
    """Method-of-moments inversion of the outcomes.

    Balanced: C0 + (S - <S>(C0)) / (d<S>/dC), linearized at the configured
    concentration. Ratio: log10(sum n_R / sum n_L) / (delta_eps l), pooled
    over trials; the per-trial log ratios give the spread. Trials with a
    zero count in either arm have no log ratio: they are dropped from the
    spread, and the bounds are judged for the trials that remain.
    """
    if outcomes.scheme != plan.scheme:
        raise PlanError("outcomes were drawn for a different scheme")
    if outcomes.scheme == "balanced":
        estimates, estimate, single_shot = _invert_balanced(outcomes, plan)
    else:
        estimates, estimate, single_shot = _invert_ratio(outcomes, plan)

    nu = len(estimates)
    dropped = plan.trials - nu
    if dropped:
        if nu == 0 or (plan.trials > 1 and nu < 2):
            raise PlanError(f"{dropped} of {plan.trials} trials recorded a zero count; "
                            "too few remain for a variance")
        logger.warning("Dropped %d of %d trials with a zero count in one arm", dropped, plan.trials)
    true_value = plan.sample.concentration
    spread = float(np.var(estimates, ddof=1)) if nu > 1 else 0.0
    variance = spread / nu
    variance_se = variance * math.sqrt(2.0 / (nu - 1)) if nu > 1 else math.inf
    cfi = _reciprocal(single_shot)
    return EstimationResult(
        estimates=estimates,
        estimate=estimate,
        true_value=true_value,
        empirical_mean=float(np.mean(estimates)),
        empirical_variance=variance,
        variance_se=variance_se,
        bias=estimate - true_value,
        bias_se=math.sqrt(variance) if nu > 1 else math.inf,
        predicted_variance=single_shot / nu,
        crb=_reciprocal(nu * cfi),
        qcrb=_reciprocal(nu * qfi_report.qfi_numerical) if qfi_report is not None else None,
        trials=nu,
        dropped_trials=dropped,
    )


def _invert_balanced(outcomes, plan):
    if plan.outcome_model == "exact-fock":
        response = balanced_response_fock(plan.probe, plan.sample, plan.waveplate, plan.common_phase)
        mean, slope = response.mean, response.dmean_dC
        single_shot = _ratio_or_inf(response.variance, slope ** 2)
    else:
        stats = balanced_detection_stats(plan.probe, plan.sample, plan.waveplate, plan.common_phase)
        mean, slope, single_shot = stats.mean, stats.dmean_dC, stats.propagated_variance
    if slope == 0.0:
        raise PlanError("balanced response is flat at the operating point (waveplate at an extremum)")
    c0 = plan.sample.concentration
    estimates = c0 + (outcomes.values - mean) / slope
    return estimates, float(c0 + (np.mean(outcomes.values) - mean) / slope), single_shot


def _invert_ratio(outcomes, plan):
    sample = plan.sample
    slope = sample.delta_epsilon * sample.path_length_cm
    if slope == 0.0:
        raise PlanError("eps_L == eps_R: the intensity ratio carries no information")
    counts = outcomes.values
    left, right = counts[:, 0], counts[:, 1]
    total_left, total_right = float(np.sum(left)), float(np.sum(right))
    if total_left <= 0.0 or total_right <= 0.0:
        raise PlanError("an arm recorded no photons; the ratio is undefined")
    estimate = math.log10(total_right / total_left) / slope

    defined = (left > 0) & (right > 0)
    estimates = np.log10(right[defined] / left[defined]) / slope

    if plan.outcome_model == "exact-fock":
        single_shot = _exact_ratio_variance(plan)
    else:
        single_shot = ratio_estimator_stats(plan.probe, sample).propagated_variance
    return estimates, estimate, single_shot


def _exact_ratio_variance(plan):
    distribution = counts_distribution_fock(
        dichroism_family_fock(plan.probe, plan.sample)(plan.sample.concentration)
    )
    mean = distribution.mean()
    var = distribution.variance()
    slope = plan.sample.delta_epsilon * plan.sample.path_length_cm
    return float((var[0] / mean[0] ** 2 + var[1] / mean[1] ** 2) / (LN10 * slope) ** 2)


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------

def crb_verdict(result: EstimationResult, qfi_report: QfiReport, tol=None) -> Verdict:
    """Compare the empirical variance with 1/(nu F) and 1/(nu Q).

    Respected when var >= (1 - 3 se) / (nu Q). The CRB is saturated when
    var is within ``tol`` of 1/(nu F) and the QCRB when it is within ``tol``
    of 1/(nu Q); the message states both.
    """
    tol = Config.SATURATION_TOL if tol is None else tol
    nu = result.trials
    qcrb = _reciprocal(nu * qfi_report.qfi_numerical)
    crb = result.crb
    variance = result.empirical_variance
    rel_se = math.sqrt(2.0 / (nu - 1)) if nu > 1 else math.inf

    respected = variance >= (1.0 - 3.0 * rel_se) * qcrb
    margin = (qcrb - variance) / (qcrb * rel_se) if qcrb and math.isfinite(rel_se) and math.isfinite(qcrb) else 0.0
    crb_saturated = math.isfinite(crb) and abs(variance / crb - 1.0) <= tol
    qcrb_saturated = math.isfinite(qcrb) and abs(variance / qcrb - 1.0) <= tol

    if not respected:
        message = "bound violated"
        logger.error("Empirical variance %.6g is %.2f sigma below the QCRB %.6g", variance, margin, qcrb)
    elif crb_saturated:
        qcrb_state = "QCRB saturated" if qcrb_saturated else "QCRB not saturated"
        message = f"CRB saturated within {tol:.0%}; {qcrb_state}"
    elif qcrb_saturated:
        message = f"QCRB saturated within {tol:.0%}"
    else:
        message = "bound respected, not saturated"
    return Verdict(
        respected=respected,
        crb_saturated=crb_saturated,
        qcrb_saturated=qcrb_saturated,
        message=message,
        empirical_variance=variance,
        crb=crb,
        qcrb=qcrb,
        margin_sigma=margin,
    )


def qfi_for_plan(plan: ExperimentPlan) -> QfiReport:
    if plan.scheme == "balanced":
        return qfi_closed_form_birefringence(plan.probe, plan.sample, plan.common_phase, plan.trials)
    return qfi_dichroism(plan.probe, plan.sample, plan.trials)


def run_plan(plan: ExperimentPlan, qfi_report: Optional[QfiReport] = None, threads=1):
    """Sample, estimate and judge a plan; returns (result, verdict, qfi_report)."""
    report = qfi_for_plan(plan) if qfi_report is None else qfi_report
    result = estimate_concentration(sample_outcomes(plan, threads), plan, report)
    return result, crb_verdict(result, report), report


def _reciprocal(value):
    return math.inf if value == 0.0 else 1.0 / value


def _ratio_or_inf(numerator, denominator):
    return math.inf if denominator == 0.0 else numerator / denominator


# ---------------------------------------------------------------------------
# Reference plans
# ---------------------------------------------------------------------------

# Molar sample with T_R = 0.9 at 1 cm and a small circular dichroism.
RATIO_REFERENCE_SAMPLE = ChiralSample(
    concentration=1e-3,
    concentration_unit="mol/L",
    path_length=1.0,
    path_length_unit="cm",
    eps_L=46.057,
    eps_R=45.757,
)


def validation_plans(trials, seed):
    """Balanced plans at the optimal waveplate and ratio plans near T = 0.9."""
    plans = []
    for s in (0.0, 0.8):
        family = ProbeFamily.COHERENT if s == 0.0 else ProbeFamily.POLARIZATION_SQUEEZED
        plans.append(ExperimentPlan(
            probe=ProbeSpec.from_photons(1e6, family=family, s=s),
            sample=SUCROSE,
            scheme="balanced",
            trials=trials,
            seed=seed,
        ))
    for s in (0.0, 1.0):
        plans.append(ExperimentPlan(
            probe=ProbeSpec.from_photons(1e9, family=ProbeFamily.TWIN_SQUEEZED, s=s),
            sample=RATIO_REFERENCE_SAMPLE,
            scheme="ratio",
            trials=trials,
            seed=seed,
        ))
    return plans
