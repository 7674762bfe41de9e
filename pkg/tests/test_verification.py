"""Tests of the verification suites"""

import pytest

from timescale_leitmann.enums import Fault, Verdict
from timescale_leitmann.timescale import Interval, Point, TimeScale
from timescale_leitmann.verification import (
    SuiteResult,
    additivity,
    bundled_scales,
    control_invariance,
    dominance,
    fundamental_theorem,
    lemma,
    linearity,
    operator_axioms,
    oracle_agreement,
    run_suites,
)

from .scales import integers


def test_bundle():
    scales = bundled_scales()
    assert list(scales) == ["integers", "hstep", "interval", "mixed", "qscale"]
    assert scales["integers"] == integers(0, 10)
    assert scales["mixed"] == TimeScale([Point(0.0), Interval(1.0, 2.0)])
    assert [component.t for component in scales["qscale"].components] == [1, 2, 4, 8, 16, 32, 64]


@pytest.mark.parametrize("suite", [operator_axioms, fundamental_theorem, additivity, linearity])
def test_calculus_suites(suite, bundled_scale):
    result = suite(bundled_scale)
    assert result.passed, result.details


def test_lemma_suite(bundled_scale):
    result = lemma(bundled_scale, 0.0, 1.0, trials=3, seed=0)
    assert result.passed, result.details
    assert result.details["verdict"] == "pass"


def test_lemma_suite_with_fault(bundled_scale):
    result = lemma(bundled_scale, 0.0, 1.0, trials=2, seed=0, fault=Fault.DROP_GAUGE_TERM)
    assert result.verdict is Verdict.FAIL


def test_oracle_agreement(bundled_scale):
    result = oracle_agreement(bundled_scale, 2.0, -1.0)
    assert result.passed, result.details
    assert result.details["max_deviation"] <= 1e-9


@pytest.mark.parametrize("magnitude", [0.1, 1.0, 10.0])
def test_dominance(bundled_scale, magnitude):
    result = dominance(bundled_scale, 0.0, 1.0, trials=20, seed=1, magnitude=magnitude)
    assert result.passed, result.details
    assert result.details["violations"] == 0
    assert result.details["lowest_sample"] >= result.details["minimum"]


def test_control_invariance(bundled_scale):
    result = control_invariance(bundled_scale, controls=2, seed=0)
    if bundled_scale.min > 0:
        assert result is None
        return
    assert result.passed, result.details
    assert result.details["s_star"] == -1


def test_run_suites():
    scales = {"points": integers(0, 3)}
    results = run_suites(scales, trials=4)
    assert [result.name for result in results] == [
        "operator_axioms",
        "fundamental_theorem",
        "additivity",
        "linearity",
        "lemma",
        "oracle_agreement",
        "dominance",
        "control_invariance",
    ]
    assert all(result.passed for result in results)
    faulty = run_suites(scales, trials=4, fault=Fault.DROP_GAUGE_TERM)
    assert [result.name for result in faulty if not result.passed] == ["lemma"]


def test_run_suites_reports_errors():
    # Boundary values that are not finite make the lemma suite raise, which is reported as a failure
    results = run_suites({"points": integers(0, 3)}, alpha=float("nan"), trials=2)
    assert not all(result.passed for result in results)


def test_suite_result():
    result = SuiteResult("lemma", "{0} ∪ {1}", Verdict.PASS, {"trials": 3})
    assert result.to_json() == {"suite": "lemma", "scale": "{0} ∪ {1}", "verdict": "pass", "details": {"trials": 3}}
    assert str(result).startswith("PASS lemma")


def test_oracle_agreement_with_single_free_variable(three_points):
    result = oracle_agreement(three_points, 0.0, 2.0)
    assert result.passed, result.details
    assert result.details["oracle_value"] == pytest.approx(6, abs=1e-12)


def test_linearity_details(unit_interval):
    result = linearity(unit_interval, factor=-4.0)
    assert result.passed, result.details
    assert result.details["scaled_functional"] == pytest.approx(-4 * result.details["functional"], rel=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("magnitude", [0.1, 1.0, 10.0])
def test_dominance_acceptance(bundled_scale, magnitude):
    result = dominance(bundled_scale, 0.0, 1.0, trials=1000, seed=0, magnitude=magnitude)
    assert result.passed, result.details
    assert result.details["samples"] == 1000


@pytest.mark.slow
def test_lemma_acceptance(bundled_scale):
    result = lemma(bundled_scale, 0.0, 1.0, trials=100, seed=0)
    assert result.passed, result.details


@pytest.mark.slow
def test_control_invariance_acceptance(bundled_scale):
    result = control_invariance(bundled_scale, controls=100, seed=0)
    if result is None:
        assert bundled_scale.min > 0
        return
    assert result.passed, result.details
    assert result.details["failed_gaps"] == 0
    assert result.details["beaten"] == 0
