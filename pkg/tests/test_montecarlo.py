"""
Monte Carlo estimator validation
"""

import math

import numpy as np
import pytest

from metrology import balanced_detection_stats, dichroism_concentration_variance
from models import SUCROSE, ChiralSample, ProbeFamily, ProbeSpec
from montecarlo import (
    RATIO_REFERENCE_SAMPLE,
    BoundViolationError,
    ExperimentPlan,
    Outcomes,
    PlanError,
    crb_verdict,
    estimate_concentration,
    qfi_for_plan,
    run_plan,
    sample_outcomes,
    validation_plans,
)

SEED = 20240601


def _balanced_plan(s=0.8, trials=1000, seed=SEED, **kwargs):
    family = ProbeFamily.COHERENT if s == 0.0 else ProbeFamily.POLARIZATION_SQUEEZED
    return ExperimentPlan(probe=ProbeSpec.from_photons(1e6, family=family, s=s), sample=SUCROSE,
                          scheme="balanced", trials=trials, seed=seed, **kwargs)


def _ratio_plan(s=0.0, trials=1000, seed=SEED, **kwargs):
    probe = ProbeSpec.from_photons(1e9, family=ProbeFamily.TWIN_SQUEEZED, s=s)
    return ExperimentPlan(probe=probe, sample=RATIO_REFERENCE_SAMPLE, scheme="ratio",
                          trials=trials, seed=seed, **kwargs)


@pytest.mark.unit
class TestExperimentPlan:
    @pytest.mark.parametrize("kwargs", [
        {"scheme": "homodyne"},
        {"outcome_model": "poisson"},
        {"trials": 0},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(PlanError):
            ExperimentPlan(probe=ProbeSpec(alpha=1.0), sample=SUCROSE, **kwargs)

    def test_default_waveplate_is_optimal(self):
        plan = _balanced_plan()
        assert plan.waveplate == pytest.approx((2 * 1.16e-3 - math.pi) / 4)
        assert _balanced_plan(xi=0.1).waveplate == 0.1

    def test_partitions_never_exceed_trials(self):
        assert _balanced_plan(trials=3).partition_count == 3
        assert _balanced_plan(trials=100, partitions=5).partition_count == 5

    def test_reference_plans(self):
        plans = validation_plans(trials=10, seed=1)
        assert [p.scheme for p in plans] == ["balanced", "balanced", "ratio", "ratio"]
        assert plans[0].probe.family is ProbeFamily.COHERENT
        assert all(p.seed == 1 and p.trials == 10 for p in plans)


@pytest.mark.montecarlo
class TestSampling:
    def test_seed_is_required(self):
        with pytest.raises(PlanError):
            sample_outcomes(_balanced_plan(seed=None))

    def test_reproducible_across_thread_counts(self):
        plan = _balanced_plan(trials=5000)
        serial = sample_outcomes(plan, threads=1)
        parallel = sample_outcomes(plan, threads=4)
        assert np.array_equal(serial.values, parallel.values)
        assert serial.values.shape == (5000,)

    def test_seed_changes_the_draw(self):
        first = sample_outcomes(_balanced_plan(trials=100, seed=1))
        second = sample_outcomes(_balanced_plan(trials=100, seed=2))
        assert not np.array_equal(first.values, second.values)

    def test_ratio_outcomes_have_two_arms(self):
        outcomes = sample_outcomes(_ratio_plan(trials=50))
        assert outcomes.values.shape == (50, 2)
        assert np.all(outcomes.values > 0)

    def test_dim_probe_needs_exact_model(self):
        plan = ExperimentPlan(probe=ProbeSpec(alpha=math.sqrt(10.0), s=1.0), sample=SUCROSE,
                              trials=10, seed=SEED)
        with pytest.raises(PlanError):
            sample_outcomes(plan)


@pytest.mark.montecarlo
class TestEstimation:
    def test_squeezed_balanced_saturates_the_bound(self):
        plan = _balanced_plan(s=0.8, trials=100_000)
        result, verdict, report = run_plan(plan, threads=2)
        assert result.empirical_variance == pytest.approx(result.predicted_variance, rel=0.05)
        assert abs(result.bias) < 4.0 * result.bias_se
        assert verdict.respected
        assert verdict.crb_saturated and verdict.qcrb_saturated
        assert verdict.message == "CRB saturated within 5%; QCRB saturated"
        assert result.qcrb == pytest.approx(1.0 / (plan.trials * report.qfi_numerical))

    def test_coherent_balanced_saturates_both_bounds(self):
        result, verdict, _ = run_plan(_balanced_plan(s=0.0, trials=100_000), threads=2)
        assert result.empirical_variance == pytest.approx(result.predicted_variance, rel=0.05)
        assert verdict.crb_saturated and verdict.qcrb_saturated
        assert verdict.message == "CRB saturated within 5%; QCRB saturated"

    def test_variance_scales_inversely_with_trials(self):
        small, _, _ = run_plan(_balanced_plan(s=0.8, trials=20_000))
        large, _, _ = run_plan(_balanced_plan(s=0.8, trials=80_000, seed=SEED + 1))
        assert small.empirical_variance / large.empirical_variance == pytest.approx(4.0, rel=0.06)

    def test_suboptimal_waveplate_saturates_only_the_crb(self):
        result, verdict, _ = run_plan(_balanced_plan(s=0.0, trials=100_000, xi=0.0))
        assert verdict.respected and verdict.crb_saturated
        assert not verdict.qcrb_saturated
        assert verdict.message == "CRB saturated within 5%; QCRB not saturated"
        assert result.empirical_variance > 100.0 * verdict.qcrb

    @pytest.mark.parametrize("s", [0.0, 1.0])
    def test_ratio_estimator_matches_error_propagation(self, s):
        plan = _ratio_plan(s=s, trials=100_000)
        result, verdict, _ = run_plan(plan)
        single_shot = dichroism_concentration_variance(plan.probe, plan.sample)
        assert result.empirical_variance == pytest.approx(single_shot / plan.trials, rel=0.05)
        assert verdict.respected and verdict.crb_saturated
        assert not verdict.qcrb_saturated
        assert verdict.message == "CRB saturated within 5%; QCRB not saturated"
        assert result.dropped_trials == 0
        assert abs(result.bias) < 4.0 * result.bias_se

    def test_noiseless_detector_violates_the_bound(self, mocker):
        plan = _balanced_plan(s=0.8, trials=1000)
        mean = balanced_detection_stats(plan.probe, plan.sample, plan.waveplate).mean
        mocker.patch("montecarlo._scheme_moments", return_value=[(mean, 0.0)])
        result, verdict, _ = run_plan(plan)
        assert result.estimate == pytest.approx(SUCROSE.concentration)
        assert result.empirical_variance == pytest.approx(0.0, abs=1e-30)
        assert not verdict.respected
        assert verdict.message == "bound violated"
        with pytest.raises(BoundViolationError):
            verdict.raise_for_violation()

    def test_flat_response_cannot_be_inverted(self, unit_sample):
        plan = ExperimentPlan(probe=ProbeSpec.from_photons(1e6, family=ProbeFamily.COHERENT),
                              sample=unit_sample(0.4), trials=10, seed=SEED, xi=0.2)
        with pytest.raises(PlanError):
            estimate_concentration(sample_outcomes(plan), plan)

    def test_ratio_needs_photons_in_both_arms(self):
        plan = _ratio_plan(trials=5)
        outcomes = Outcomes(values=np.zeros((5, 2)), scheme="ratio", model="gaussian-bright")
        with pytest.raises(PlanError):
            estimate_concentration(outcomes, plan)

    def test_zero_count_trials_are_dropped(self):
        plan = _ratio_plan(trials=5)
        values = np.array([[1.0, 2.0], [0.0, 3.0], [2.0, 2.0], [4.0, 0.0], [3.0, 1.0]])
        result = estimate_concentration(Outcomes(values=values, scheme="ratio", model="gaussian-bright"), plan)
        slope = plan.sample.delta_epsilon * plan.sample.path_length_cm
        assert result.dropped_trials == 2
        assert result.trials == 3
        np.testing.assert_allclose(result.estimates, np.log10([2.0, 1.0, 1.0 / 3.0]) / slope)
        assert result.estimate == pytest.approx(math.log10(8.0 / 10.0) / slope)

    def test_too_many_zero_count_trials(self):
        plan = _ratio_plan(trials=3)
        values = np.array([[1.0, 2.0], [0.0, 3.0], [2.0, 0.0]])
        with pytest.raises(PlanError):
            estimate_concentration(Outcomes(values=values, scheme="ratio", model="gaussian-bright"), plan)

    def test_ratio_needs_dichroism(self):
        sample = ChiralSample(concentration=1e-3, concentration_unit="mol/L", path_length=1.0,
                              path_length_unit="cm", eps_L=40.0, eps_R=40.0)
        plan = ExperimentPlan(probe=ProbeSpec.from_photons(1e9, family=ProbeFamily.TWIN_SQUEEZED),
                              sample=sample, scheme="ratio", trials=4, seed=SEED)
        outcomes = Outcomes(values=np.ones((4, 2)), scheme="ratio", model="gaussian-bright")
        with pytest.raises(PlanError):
            estimate_concentration(outcomes, plan)

    def test_outcomes_must_match_the_scheme(self):
        outcomes = Outcomes(values=np.ones(4), scheme="balanced", model="gaussian-bright")
        with pytest.raises(PlanError):
            estimate_concentration(outcomes, _ratio_plan(trials=4))

    def test_single_trial_has_unbounded_uncertainty(self):
        result = estimate_concentration(sample_outcomes(_balanced_plan(trials=1)), _balanced_plan(trials=1))
        assert math.isinf(result.variance_se)
        assert result.qcrb is None
        assert result.to_dict()["trials"] == 1


@pytest.mark.montecarlo
@pytest.mark.oracle
class TestExactFockModel:
    def test_balanced_coherent_light(self, unit_sample):
        plan = ExperimentPlan(probe=ProbeSpec(family=ProbeFamily.COHERENT, alpha=1.0),
                              sample=unit_sample(0.3), trials=2000, seed=SEED,
                              outcome_model="exact-fock")
        result, _, report = run_plan(plan)
        assert np.all(np.equal(np.mod(sample_outcomes(plan).values, 1.0), 0.0))
        assert result.predicted_variance == pytest.approx(1.0 / 2000, rel=1e-3)
        assert result.empirical_variance == pytest.approx(result.predicted_variance, rel=0.15)
        assert report.qfi_numerical == pytest.approx(1.0)

    def test_ratio_with_zero_count_trials(self, molar_sample):
        plan = ExperimentPlan(probe=ProbeSpec(family=ProbeFamily.TWIN_SQUEEZED, alpha=1.0),
                              sample=molar_sample, scheme="ratio", trials=500, seed=SEED,
                              outcome_model="exact-fock")
        outcomes = sample_outcomes(plan)
        assert np.any(outcomes.values == 0)
        result = estimate_concentration(outcomes, plan, qfi_for_plan(plan))

        counts = outcomes.values
        kept = counts[(counts[:, 0] > 0) & (counts[:, 1] > 0)]
        slope = molar_sample.delta_epsilon * molar_sample.path_length_cm
        assert result.dropped_trials == 500 - len(kept) > 0
        assert result.trials == len(kept)
        # every estimate is a measured log ratio, none is synthesized
        np.testing.assert_allclose(result.estimates, np.log10(kept[:, 1] / kept[:, 0]) / slope)
        assert math.isfinite(result.estimate)
        assert math.isfinite(result.predicted_variance)
        assert result.to_dict()["dropped_trials"] == result.dropped_trials


@pytest.mark.unit
class TestVerdict:
    def test_verdict_with_loose_tolerance(self):
        plan = _balanced_plan(s=0.8, trials=10_000)
        report = qfi_for_plan(plan)
        outcomes = sample_outcomes(plan)
        result = estimate_concentration(outcomes, plan, report)
        verdict = crb_verdict(result, report, tol=1.0)
        assert verdict.qcrb_saturated
        assert verdict.to_dict()["message"] == "CRB saturated within 100%; QCRB saturated"
        verdict.raise_for_violation()

    def test_verdict_with_tight_tolerance(self):
        plan = _balanced_plan(s=0.8, trials=10_000)
        report = qfi_for_plan(plan)
        result = estimate_concentration(sample_outcomes(plan), plan, report)
        verdict = crb_verdict(result, report, tol=1e-9)
        assert verdict.respected
        assert not verdict.crb_saturated and not verdict.qcrb_saturated
        assert verdict.message == "bound respected, not saturated"
