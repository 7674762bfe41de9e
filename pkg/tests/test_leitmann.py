"""Tests of the fundamental lemma verification and the transport of minimizers"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from timescale_leitmann.enums import Fault, Verdict
from timescale_leitmann.errors import DegenerateIntervalError, InconsistentTransformationError
from timescale_leitmann.leitmann import (
    LeitmannPair,
    Transformation,
    identity_pair,
    identity_residual,
    linear_shift_case,
    shift_constants,
    transport_minimizer,
    verify_lemma,
)
from timescale_leitmann.variational import (
    Trajectory,
    VariationalProblem,
    evaluate_functional,
    illustrative_problem,
    quadratic_energy,
    random_admissible,
    sample_points,
)

from .scales import hstep, integers

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


@pytest.fixture
def pair(three_points) -> LeitmannPair:
    """The linear shift pair on {0, 1, 2} with x(0) = 0 and x(2) = 2, so c = 1 and d = 0"""
    return linear_shift_case(illustrative_problem(three_points, 0, 2, 0, 2))


def zero(pair_: LeitmannPair) -> Trajectory:
    return Trajectory.from_rule(pair_.transformed.scale, lambda t: 0.0)


def test_shift_constants():
    assert shift_constants(0, 2, 0, 2) == (1, 0)
    assert shift_constants(0, 1, 1, 0) == (-1, 1)
    with pytest.raises(DegenerateIntervalError):
        shift_constants(1, 1, 0, 2)


@given(finite, st.floats(min_value=0.1, max_value=10), finite, finite)
def test_shift_constants_solve_the_boundary_system(a, length, alpha, beta):
    b = a + length
    c, d = shift_constants(a, b, alpha, beta)
    assert c * a + d == pytest.approx(alpha, abs=1e-9 * max(1, abs(alpha), abs(c * a)))
    assert c * b + d == pytest.approx(beta, abs=1e-9 * max(1, abs(beta), abs(c * b)))


def test_residual_of_trivial_minimizer(pair):
    assert identity_residual(pair, zero(pair), 0) == 0


def test_residual_along_random_trajectories(pair):
    for seed in range(20):
        x_tilde = random_admissible(pair.transformed, seed)
        for t in (0, 1):
            assert abs(identity_residual(pair, x_tilde, t)) <= 1e-12


def test_residual_matches_hand_expansion(pair):
    # c = 1, d = 0: G^Δ = 2x̃^Δ + x̃^σ + t·x̃^Δ + t + σ(t) + 1
    x_tilde = random_admissible(pair.transformed, seed=5)
    for t in (0, 1):
        x_delta = x_tilde(t + 1) - x_tilde(t)
        x_sigma = x_tilde(t + 1)
        gauge_delta = 2 * x_delta + x_sigma + t * x_delta + t + (t + 1) + 1
        lagrangian = (x_delta + 1) ** 2 + (x_sigma + t + 1) + t * (x_delta + 1)
        by_hand = lagrangian - x_delta**2 - gauge_delta
        assert by_hand == pytest.approx(0, abs=1e-12)
        assert identity_residual(pair, x_tilde, t) == pytest.approx(by_hand, abs=1e-12)


def test_residual_of_identity_pair(mixed_scale):
    p = illustrative_problem(mixed_scale, 0, 2, 0, 1)
    identity = identity_pair(p)
    x = random_admissible(p, seed=1)
    assert identity_residual(identity, x, 0) == 0
    for t in (1, 1.5, 2):
        assert identity_residual(identity, x, t) == pytest.approx(0, abs=1e-9)


def test_residual_of_dropped_gauge_term(three_points):
    faulty = linear_shift_case(illustrative_problem(three_points, 0, 2, 0, 2), fault=Fault.DROP_GAUGE_TERM)
    # The residual is (c·t²)^Δ = c·(t + σ(t))
    assert identity_residual(faulty, zero(faulty), 0) == 1
    assert identity_residual(faulty, zero(faulty), 1) == 3


def test_verify_lemma(pair):
    report = verify_lemma(pair, trials=50)
    assert report.passed
    assert report.verdict is Verdict.PASS
    assert report.max_abs_residual <= 1e-12
    assert report.gap_constant_spread <= 1e-8
    expected = pair.transform.gauge(2, 0) - pair.transform.gauge(0, 0)
    assert expected == 6
    assert report.functional_gap == pytest.approx(expected, abs=1e-8)
    assert report.boundary_gap == pytest.approx(expected, abs=1e-12)
    assert report.points_checked == 2 * 50
    assert set(report.to_json()) == {
        "max_abs_residual",
        "points_checked",
        "functional_gap",
        "gap_constant_spread",
        "verdict",
        "tolerances",
    }
    assert "Verdict            : pass" in str(report)


def test_verify_lemma_on_identity_pair(mixed_scale):
    report = verify_lemma(identity_pair(illustrative_problem(mixed_scale, 0, 2, 0, 1)), trials=5)
    assert report.passed
    assert report.functional_gap == pytest.approx(0, abs=1e-8)
    assert report.gap_constant_spread <= 1e-8


def test_verify_lemma_detects_dropped_gauge_term(three_points):
    faulty = linear_shift_case(illustrative_problem(three_points, 0, 2, 0, 2), fault=Fault.DROP_GAUGE_TERM)
    report = verify_lemma(faulty, trials=10)
    assert not report.passed
    assert report.max_abs_residual > report.tolerances["tol_res"]
    assert report.failures


def test_verify_lemma_on_bundle(bundled_scale):
    p = illustrative_problem(bundled_scale, bundled_scale.min, bundled_scale.max, 0.5, -1.5)
    report = verify_lemma(linear_shift_case(p), trials=5, seed=11)
    assert report.passed, str(report)
    expected_tol = 1e-12 if bundled_scale.is_scattered else 1e-8
    assert report.tolerances == {"tol_res": expected_tol, "tol_gap": 1e-8}


def test_verify_lemma_requires_trials(pair):
    with pytest.raises(ValueError):
        verify_lemma(pair, trials=0)


def test_transport_minimizer(pair):
    x_star = transport_minimizer(pair, zero(pair))
    assert [x_star(t) for t in (0, 1, 2)] == [0, 1, 2]
    assert evaluate_functional(pair.original, x_star) == 6


def test_transport_decreasing_minimizer():
    p = illustrative_problem(hstep(0, 1, 0.5), 0, 1, 1, 0)
    pair_ = linear_shift_case(p)
    x_star = transport_minimizer(pair_, zero(pair_))
    assert [x_star(t) for t in (0, 0.5, 1)] == [1, 0.5, 0]


def test_transport_on_identity_pair(mixed_scale):
    p = illustrative_problem(mixed_scale, 0, 2, 0, 1)
    x = random_admissible(p, seed=2)
    moved = transport_minimizer(identity_pair(p), x)
    assert all(moved(t) == x(t) for t in sample_points(p.scale, 11))


def test_transport_round_trip(mixed_scale):
    pair_ = linear_shift_case(illustrative_problem(mixed_scale, 0, 2, 3, -1))
    x_tilde = random_admissible(pair_.transformed, seed=9)
    back = transport_minimizer(pair_, x_tilde).map(pair_.transform.z_inv)
    assert all(back(t) == pytest.approx(x_tilde(t), abs=1e-12) for t in sample_points(mixed_scale, 11))


def test_transport_rejects_inadmissible_image(pair):
    shifted = Trajectory.from_rule(pair.transformed.scale, lambda t: 1.0)
    with pytest.raises(InconsistentTransformationError):
        transport_minimizer(pair, shifted)


def test_pair_validation(three_points, pair):
    original = pair.original
    wrong_boundary = VariationalProblem(three_points, 0, 2, 0, 1, quadratic_energy())
    with pytest.raises(InconsistentTransformationError):
        LeitmannPair(original, wrong_boundary, pair.transform)
    doubling = Transformation(lambda t, x: 2 * x, lambda t, x: x, lambda t, x: 0.0)
    with pytest.raises(InconsistentTransformationError):
        LeitmannPair(original, VariationalProblem(three_points, 0, 2, 0, 2, quadratic_energy()), doubling)
    shorter = VariationalProblem(three_points, 0, 1, 0, 0, quadratic_energy())
    with pytest.raises(InconsistentTransformationError):
        LeitmannPair(original, shorter, pair.transform)


def test_linear_shift_requires_family(three_points):
    with pytest.raises(ValueError):
        linear_shift_case(VariationalProblem(three_points, 0, 2, 0, 2, quadratic_energy()))


@pytest.mark.parametrize("magnitude", [0.1, 1, 10])
def test_dominance(magnitude):
    p = illustrative_problem(integers(0, 10), 0, 10, 0, 10)
    pair_ = linear_shift_case(p)
    minimum = evaluate_functional(p, transport_minimizer(pair_, zero(pair_)))
    for seed in range(200):
        assert minimum <= evaluate_functional(p, random_admissible(p, seed, magnitude)) + 1e-12


def test_gap_transfers_between_problems(mixed_scale):
    p = illustrative_problem(mixed_scale, 0, 2, 0, 2)
    pair_ = linear_shift_case(p)
    x_star = transport_minimizer(pair_, zero(pair_))
    original_minimum = evaluate_functional(p, x_star)
    for seed in range(5):
        x = random_admissible(p, seed)
        x_tilde = x.map(pair_.transform.z_inv)
        original_gap = evaluate_functional(p, x) - original_minimum
        transformed_gap = evaluate_functional(pair_.transformed, x_tilde)
        assert original_gap == pytest.approx(transformed_gap, abs=1e-8)
        assert original_gap >= 0


def test_transformation_with_pointwise_rules(mixed_scale):
    vectorized = linear_shift_case(illustrative_problem(mixed_scale, 0, 2, 1, -1))
    transform = vectorized.transform
    assert transform.vectorized
    assert Transformation.identity().vectorized
    pointwise = LeitmannPair(
        vectorized.original, vectorized.transformed, Transformation(transform.z, transform.z_inv, transform.gauge)
    )
    assert not pointwise.transform.vectorized
    fast, slow = verify_lemma(vectorized, trials=3), verify_lemma(pointwise, trials=3)
    assert fast.passed and slow.passed
    assert fast.functional_gap == pytest.approx(slow.functional_gap, abs=1e-10)
    x_fast, x_slow = transport_minimizer(vectorized, zero(vectorized)), transport_minimizer(pointwise, zero(pointwise))
    assert [x_fast(t) for t in sample_points(mixed_scale, 5)] == [x_slow(t) for t in sample_points(mixed_scale, 5)]
