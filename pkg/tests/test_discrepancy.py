"""
Oracle cross-validation and closed-form arbitration
"""

import json
import math

import pytest

from discrepancy import (
    GRIDS,
    ZERO_QFI_TOL,
    OraclePoint,
    PointRecord,
    build_discrepancy_report,
    dump_report,
    evaluate_grid,
    evaluate_point,
    grid_points,
)


def _record(oracle, alpha=1.0, eta=1.0, s=0.5, delta_phi=0.2, bright=None, propagation=None,
            vacuum=0.0, printed=None, quotient=None, printed_unity=None, quotient_unity=None,
            gaussian=None, cfi=None):
    gaussian = oracle if gaussian is None else gaussian
    difference = abs(gaussian - oracle)
    relative = difference / oracle if oracle > ZERO_QFI_TOL else difference
    bright = 2.0 * oracle + 1.0 if bright is None else bright
    return PointRecord(
        alpha=alpha, s=s, eta=eta, delta_phi=delta_phi, cutoff=None,
        oracle_qfi=oracle, oracle_method="pure", oracle_floor_sensitivity=0.0,
        gaussian_qfi=gaussian, relative_error=relative,
        gaussian_match=difference <= 0.01 * oracle + ZERO_QFI_TOL,
        printed_full_qfi=vacuum + bright,
        printed_bright_lossless=bright,
        error_propagation_fisher=propagation,
        closed_form_vacuum=vacuum,
        lossy_bright_printed=2.0 * oracle + 1.0 if printed is None else printed,
        lossy_bright_quotient=2.0 * oracle + 1.0 if quotient is None else quotient,
        lossy_bright_printed_unity=2.0 * oracle + 1.0 if printed_unity is None else printed_unity,
        lossy_bright_quotient_unity=2.0 * oracle + 1.0 if quotient_unity is None else quotient_unity,
        balanced_cfi=oracle if cfi is None else cfi,
        chain_ok=(oracle if cfi is None else cfi) <= oracle + ZERO_QFI_TOL,
    )


def _squeezed_vacuum(oracle, vacuum, eta=1.0):
    return [_record(oracle, alpha=0.0, eta=eta, delta_phi=dphi, vacuum=vacuum)
            for dphi in (0.0, 0.2, math.pi / 2.0)]


def _tension(report, name):
    return next(t for t in report["tensions"] if t["name"] == name)


@pytest.mark.unit
class TestGrid:
    def test_grid_sizes(self):
        # squeezed vacuum joins only with s > 0
        assert len(grid_points("smoke")) == 18
        assert len(grid_points("small")) == 66

    def test_points_cover_the_axes(self):
        points = grid_points("small")
        assert {p.alpha for p in points} == set(GRIDS["small"]["alpha"])
        assert {p.delta_phi for p in points} == set(GRIDS["small"]["delta_phi"])
        assert not [p for p in points if p.alpha == 0.0 and p.s == 0.0]

    def test_unknown_scale(self):
        with pytest.raises(ValueError):
            grid_points("huge")

    def test_point_sample_reads_delta_phi(self):
        point = OraclePoint(alpha=1.0, s=0.2, eta=0.7, delta_phi=0.2)
        sample = point.sample()
        assert sample.phase_rate * sample.concentration == pytest.approx(0.2)
        assert sample.eta == 0.7
        assert point.probe().theta_eff == 0.0

    def test_evaluate_grid_keeps_order(self, mocker):
        mocker.patch("discrepancy.evaluate_point", side_effect=lambda point, cutoff: point.delta_phi)
        points = grid_points("smoke")
        assert evaluate_grid(points, threads=3) == [p.delta_phi for p in points]


@pytest.mark.unit
class TestArbitration:
    def test_tensions_come_in_dependency_order(self):
        report = build_discrepancy_report([_record(1.0)])
        assert [t["name"] for t in report["tensions"]] == [
            "vacuum_term", "full_qfi_vs_error_propagation", "lossy_displacement_term"]

    def test_single_candidate_wins(self):
        records = [_record(q, propagation=q) for q in (1.0, 2.0, 3.0)]
        report = build_discrepancy_report(records)
        tension = _tension(report, "full_qfi_vs_error_propagation")
        assert tension["verdict"] == "error_propagation"
        assert tension["match_counts"] == {"printed_full_qfi": 0, "error_propagation": 3}

    def test_both_candidates_match(self):
        records = [_record(q, bright=q, propagation=q) for q in (1.0, 2.0, 3.0)]
        tension = _tension(build_discrepancy_report(records), "full_qfi_vs_error_propagation")
        assert tension["verdict"] == "indistinguishable"

    def test_partial_matches_give_no_verdict(self):
        records = [_record(1.0, eta=0.7, quotient=1.0), _record(2.0, eta=0.7),
                   _record(3.0, eta=0.7, quotient=3.0)]
        tension = _tension(build_discrepancy_report(records), "lossy_displacement_term")
        assert tension["verdict"] == "none"
        assert tension["match_counts"]["quotient"] == 2
        assert len(tension["matching_points"]["quotient"]) == 2

    def test_too_few_points(self):
        records = [_record(1.0, eta=0.7, quotient=1.0)]
        tension = _tension(build_discrepancy_report(records), "lossy_displacement_term")
        assert tension["verdict"] == "insufficient"

    def test_coherent_points_stay_out_of_the_lossless_tension(self):
        records = [_record(1.0, s=0.0, propagation=1.0) for _ in range(3)]
        tension = _tension(build_discrepancy_report(records), "full_qfi_vs_error_propagation")
        assert tension["points"] == 0

    def test_vacuum_term_absent_when_squeezed_vacuum_carries_nothing(self):
        records = _squeezed_vacuum(1e-7, vacuum=5.524) + _squeezed_vacuum(3e-8, vacuum=2.1, eta=0.7)
        tension = _tension(build_discrepancy_report(records), "vacuum_term")
        assert tension["points"] == 6
        assert tension["verdict"] == "absent"
        assert tension["match_counts"] == {"printed": 0, "absent": 6}

    def test_vacuum_term_confirmed(self):
        records = _squeezed_vacuum(5.524, vacuum=5.524)
        tension = _tension(build_discrepancy_report(records), "vacuum_term")
        assert tension["verdict"] == "printed"

    def test_printed_vacuum_is_taken_out_before_the_displacement_check(self):
        # oracle = vacuum 2 + displacement 1; only the displacement is compared
        records = _squeezed_vacuum(2.0, vacuum=2.0) + [
            _record(3.0, vacuum=2.0, propagation=1.0, bright=3.0) for _ in range(3)]
        report = build_discrepancy_report(records)
        tension = _tension(report, "full_qfi_vs_error_propagation")
        assert tension["verdict"] == "error_propagation"
        assert tension["vacuum_resolution"] == "printed"

    def test_absent_vacuum_compares_against_the_whole_oracle(self):
        records = _squeezed_vacuum(0.0, vacuum=2.0) + [
            _record(3.0, vacuum=2.0, propagation=1.0, bright=3.0) for _ in range(3)]
        tension = _tension(build_discrepancy_report(records), "full_qfi_vs_error_propagation")
        assert tension["verdict"] == "printed_full_qfi"
        assert tension["vacuum_resolution"] == "absent"

    def test_lossy_forms_take_the_unity_angle_factor_after_error_propagation(self):
        records = [_record(q, propagation=q) for q in (1.0, 2.0, 3.0)]
        records += [_record(q, eta=0.7, quotient_unity=q, quotient=0.5 * q) for q in (1.0, 2.0, 3.0)]
        tension = _tension(build_discrepancy_report(records), "lossy_displacement_term")
        assert tension["angle_factor"] == "unity"
        assert tension["verdict"] == "quotient"

    def test_lossy_forms_keep_the_sine_factor_otherwise(self):
        records = [_record(q, eta=0.7, quotient_unity=q, quotient=0.5 * q) for q in (1.0, 2.0, 3.0)]
        tension = _tension(build_discrepancy_report(records), "lossy_displacement_term")
        assert tension["angle_factor"] == "abs_sin_delta_phi"
        assert tension["verdict"] == "none"

    def test_zero_oracle_points_match_within_the_absolute_floor(self):
        records = [_record(0.0, alpha=0.0, gaussian=2e-7, cfi=5e-7)]
        report = build_discrepancy_report(records)
        assert report["cross_validation"]["passed"]
        assert report["qcrb_chain"]["passed"]
        assert report["absolute_tolerance"] == ZERO_QFI_TOL

    def test_mismatches_and_violations_are_listed(self):
        records = [_record(1.0), _record(1.0, gaussian=1.5), _record(1.0, cfi=1.2)]
        report = build_discrepancy_report(records)
        assert not report["cross_validation"]["passed"]
        assert report["cross_validation"]["max_relative_error"] == pytest.approx(0.5)
        assert len(report["cross_validation"]["mismatches"]) == 1
        assert not report["qcrb_chain"]["passed"]

    def test_report_dump_is_deterministic(self):
        records = [_record(q, propagation=q) for q in (1.0, 2.0, 3.0)]
        first = dump_report(build_discrepancy_report(records))
        second = dump_report(build_discrepancy_report(records))
        assert first == second
        assert json.loads(first)["cross_validation"]["points"] == 3


@pytest.mark.oracle
class TestOraclePoints:
    def test_lossless_point(self):
        record = evaluate_point(OraclePoint(alpha=0.5, s=0.2, eta=1.0, delta_phi=0.2))
        assert record.gaussian_match
        assert record.chain_ok
        assert record.error_propagation_fisher == pytest.approx(record.oracle_qfi, rel=0.01)
        assert record.printed_full_qfi > 1.5 * record.oracle_qfi

    def test_coherent_point(self):
        record = evaluate_point(OraclePoint(alpha=0.5, s=0.0, eta=1.0, delta_phi=math.pi / 2))
        assert record.oracle_qfi == pytest.approx(0.25, rel=1e-3)
        assert record.balanced_cfi == pytest.approx(0.25, rel=1e-3)

    def test_squeezed_vacuum_point(self):
        record = evaluate_point(OraclePoint(alpha=0.0, s=0.5, eta=1.0, delta_phi=0.2))
        assert record.oracle_qfi == pytest.approx(0.0, abs=ZERO_QFI_TOL)
        assert record.gaussian_qfi == pytest.approx(0.0, abs=1e-12)
        assert record.gaussian_match
        assert record.closed_form_vacuum == pytest.approx(4.0 * math.sinh(1.0) ** 2)

    def test_lossy_point_follows_the_quotient_with_unit_angle_factor(self):
        record = evaluate_point(OraclePoint(alpha=0.5, s=0.2, eta=0.7, delta_phi=0.0))
        assert record.lossy_bright_quotient_unity == pytest.approx(record.oracle_qfi, rel=0.01)
        assert abs(record.lossy_bright_printed_unity - record.oracle_qfi) > 0.05 * record.oracle_qfi


@pytest.mark.oracle
@pytest.mark.slow
@pytest.mark.integration
class TestSmokeGrid:
    def test_verdicts(self):
        records = evaluate_grid(grid_points("smoke"), threads=2)
        report = build_discrepancy_report(records)
        assert report["cross_validation"]["passed"]
        assert report["qcrb_chain"]["passed"]
        assert _tension(report, "vacuum_term")["verdict"] == "absent"
        assert _tension(report, "full_qfi_vs_error_propagation")["verdict"] == "error_propagation"
        assert _tension(report, "lossy_displacement_term")["verdict"] == "quotient"


@pytest.mark.oracle
@pytest.mark.slow
@pytest.mark.integration
class TestSmallGrid:
    def test_verdicts(self):
        records = evaluate_grid(grid_points("small"), threads=4)
        report = build_discrepancy_report(records)
        assert report["cross_validation"]["points"] == 66
        assert report["cross_validation"]["passed"]
        assert report["qcrb_chain"]["passed"]
        assert _tension(report, "vacuum_term")["verdict"] == "absent"
        assert _tension(report, "full_qfi_vs_error_propagation")["verdict"] == "error_propagation"
        assert _tension(report, "lossy_displacement_term")["verdict"] == "quotient"
