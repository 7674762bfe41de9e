"""Tests of the delta derivative, the σ-composition and the delta integral"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from timescale_leitmann.delta_calculus import (
    ScaleFunction,
    compose_sigma,
    delta_derivative,
    delta_integral,
    delta_product,
    dense_delta_derivative,
    kappa_samples,
    oriented_delta_integral,
    sample_dense,
)
from timescale_leitmann.errors import DomainError, MembershipError, QuadratureError
from timescale_leitmann.timescale import Interval, Point, TimeScale

from .scales import hstep, integers

identity = ScaleFunction(lambda t: t)
square = ScaleFunction(lambda t: t**2)


def test_compose_sigma(z_scale, unit_interval, mixed_scale):
    assert compose_sigma(z_scale, identity)(3) == 4
    assert compose_sigma(unit_interval, square)(0.5) == 0.25
    assert compose_sigma(mixed_scale, identity)(0) == 1


def test_derivative_on_integers(z_scale):
    assert delta_derivative(z_scale, square, 3) == 7
    assert all(delta_derivative(z_scale, square, t) == 2 * t + 1 for t in range(10))


def test_derivative_on_interval(unit_interval):
    assert delta_derivative(unit_interval, square, 0.5) == pytest.approx(1.0, abs=1e-6)
    assert delta_derivative(unit_interval, square, 0.0) == pytest.approx(0.0, abs=1e-6)
    assert delta_derivative(unit_interval, square, 1.0) == pytest.approx(2.0, abs=1e-6)
    exact = ScaleFunction.from_polynomial(Polynomial([0, 0, 1]))
    assert delta_derivative(unit_interval, exact, 0.5) == 1.0


def test_derivative_on_hstep():
    ts = hstep(0, 2, 0.5)
    assert all(delta_derivative(ts, identity, t) == 1 for t in (0, 0.5, 1, 1.5))


def test_derivative_on_mixed_scale(mixed_scale):
    assert delta_derivative(mixed_scale, square, 0) == 1
    assert delta_derivative(mixed_scale, square, 1) == pytest.approx(2.0, abs=1e-6)


def test_derivative_on_short_segment():
    ts = TimeScale([Interval(0.0, 1e-3)])
    assert delta_derivative(ts, square, 5e-4) == pytest.approx(1e-3, abs=1e-9)


def test_derivative_at_break():
    ts = TimeScale([Interval(0.0, 1.0)])
    kink = ScaleFunction(lambda t: abs(t - 0.5), breaks=(0.5,))
    assert delta_derivative(ts, kink, 0.5) == pytest.approx(1.0, abs=1e-6)
    assert delta_derivative(ts, kink, 0.4999) == pytest.approx(-1.0, abs=1e-6)


def test_derivative_domain(z_scale):
    with pytest.raises(DomainError):
        delta_derivative(z_scale, square, 10)
    with pytest.raises(MembershipError):
        delta_derivative(z_scale, square, 2.5)


def test_product_rule(z_scale, unit_interval):
    assert delta_product(z_scale, identity, identity, 3) == 7
    assert delta_product(unit_interval, identity, square, 0.5) == pytest.approx(0.75, abs=1e-6)


def test_integral_on_hstep():
    assert delta_integral(hstep(0, 2, 0.5), identity, 0, 2) == 1.5


def test_integral_on_interval(unit_interval):
    assert delta_integral(unit_interval, identity, 0, 1) == pytest.approx(0.5, abs=1e-9)
    assert delta_integral(unit_interval, ScaleFunction(np.cos), 0, 1) == pytest.approx(math.sin(1), abs=1e-9)


def test_integral_on_mixed_scale(mixed_scale):
    assert delta_integral(mixed_scale, ScaleFunction.constant(1.0), 0, 2) == pytest.approx(2.0, abs=1e-9)


def test_integral_on_integers(z_scale):
    assert delta_integral(z_scale, square, 0, 10) == sum(k**2 for k in range(10))
    assert delta_integral(z_scale, square, 4, 4) == 0


def test_integral_uses_left_limit_before_a_gap():
    ts = TimeScale([Interval(0.0, 1.0), Point(3.0)])
    jump = ScaleFunction(lambda t: 10.0 if t >= 1 else t)
    assert delta_integral(ts, jump, 0, 3) == pytest.approx(0.5 + 2 * 10.0, abs=1e-9)


def test_integral_splits_at_breaks(unit_interval):
    kink = ScaleFunction(lambda t: abs(t - 0.5), breaks=(0.5,))
    assert delta_integral(unit_interval, kink, 0, 1) == pytest.approx(0.25, abs=1e-12)


def test_integral_bounds(z_scale):
    with pytest.raises(DomainError):
        delta_integral(z_scale, identity, 3, 1)
    with pytest.raises(MembershipError):
        delta_integral(z_scale, identity, 0, 10.5)
    assert oriented_delta_integral(z_scale, identity, 3, 1) == -delta_integral(z_scale, identity, 1, 3)


def test_quadrature_error(unit_interval):
    with pytest.raises(QuadratureError) as exc_info:
        delta_integral(unit_interval, ScaleFunction(lambda t: math.sin(200 * t)), 0, 1, max_nodes=64)
    assert math.isfinite(exc_info.value.estimate)


def test_kappa_samples(z_scale, unit_interval, mixed_scale):
    assert kappa_samples(z_scale) == list(range(10))
    samples = kappa_samples(unit_interval, 4)
    assert samples == pytest.approx([0.2, 0.4, 0.6, 0.8])
    assert kappa_samples(mixed_scale, 1) == [0, 1.5]


def test_fundamental_theorem_on_bundle(bundled_scale):
    antiderivative = ScaleFunction.from_polynomial(Polynomial([1.0, -2.0, 0.5, 0.25]))
    derivative = ScaleFunction(lambda t: delta_derivative(bundled_scale, antiderivative, t))
    a, b = bundled_scale.min, bundled_scale.max
    expected = antiderivative(b) - antiderivative(a)
    assert delta_integral(bundled_scale, derivative, a, b) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=-20, max_value=20), min_size=2, max_size=12, unique=True),
    st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=3),
)
def test_fundamental_theorem_on_point_sets(points, coefficients):
    ts = TimeScale([Point(float(t)) for t in points])
    antiderivative = ScaleFunction(Polynomial(coefficients))
    derivative = ScaleFunction(lambda t: delta_derivative(ts, antiderivative, t))
    expected = antiderivative(ts.max) - antiderivative(ts.min)
    assert delta_integral(ts, derivative, ts.min, ts.max) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10), st.integers(min_value=0, max_value=10))
def test_additivity_on_integers(c, d):
    ts = integers(0, 10)
    c, d = min(c, d), max(c, d)
    whole = delta_integral(ts, square, 0, 10)
    assert delta_integral(ts, square, 0, c) + delta_integral(ts, square, c, 10) == whole
    assert oriented_delta_integral(ts, square, c, d) == -oriented_delta_integral(ts, square, d, c)


@pytest.mark.parametrize("segment", [Interval(0.0, 1.0), Interval(2.0, 2.003)], ids=["unit", "short"])
def test_dense_derivative_matches_pointwise_stencil(segment):
    ts = TimeScale([segment])
    f = ScaleFunction(math.sin)
    nodes = np.linspace(segment.lo, segment.hi, 11)
    dense = dense_delta_derivative(f, nodes, segment.lo, segment.hi, ts.eps_member)
    assert dense.tolist() == pytest.approx([delta_derivative(ts, f, t) for t in nodes], abs=1e-12)
    assert sample_dense(f, nodes, segment.lo, segment.hi).tolist() == [math.sin(t) for t in nodes]


def test_dense_rules_are_used():
    def scalar(t):
        raise AssertionError(f"Evaluated at {t} node by node.")

    cube = ScaleFunction(scalar, dense=lambda nodes, lo, hi: nodes**3, dense_derivative=lambda nodes, lo, hi: 3.0)
    nodes = np.array([0.0, 0.5, 1.0])
    assert dense_delta_derivative(cube, nodes, 0, 1, 1e-12).tolist() == [3, 3, 3]
    assert delta_integral(TimeScale([Interval(0.0, 1.0)]), cube, 0, 1) == pytest.approx(0.25, abs=1e-12)


def test_dense_rules_of_constructors():
    nodes = np.array([0.0, 0.5, 2.0])
    assert sample_dense(ScaleFunction.constant(2.5), nodes, 0, 2).tolist() == [2.5, 2.5, 2.5]
    parabola = ScaleFunction.from_polynomial(Polynomial([1.0, 0.0, 1.0]))
    assert sample_dense(parabola, nodes, 0, 2).tolist() == [1, 1.25, 5]
    assert dense_delta_derivative(parabola, nodes, 0, 2, 1e-12).tolist() == [0, 1, 4]
