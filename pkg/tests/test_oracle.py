"""Tests of the discretized minimization oracle"""

import numpy as np
import pytest

from timescale_leitmann.enums import OracleMethod
from timescale_leitmann.errors import DegeneracyError, WrongOracleError
from timescale_leitmann.leitmann import linear_shift_case, transport_minimizer
from timescale_leitmann.oracle import DiscretizedProblem, discretize, grid_values, solve_generic, solve_quadratic
from timescale_leitmann.timescale import Interval, Point, TimeScale
from timescale_leitmann.variational import (
    Lagrangian,
    Trajectory,
    VariationalProblem,
    evaluate_functional,
    illustrative_lagrangian,
    illustrative_problem,
    quadratic_energy,
    random_admissible,
)

from .scales import hstep, integers, qscale


def leitmann_minimizer(p: VariationalProblem) -> Trajectory:
    pair = linear_shift_case(p)
    return transport_minimizer(pair, Trajectory.from_rule(pair.transformed.scale, lambda t: 0.0))


def test_discretize_scattered(three_points):
    dp = discretize(illustrative_problem(three_points, 0, 2, 0, 2))
    assert dp.grid == (0, 1, 2)
    assert dp.n_free == 1
    assert dp.exact


def test_discretize_dense(unit_interval, mixed_scale):
    dp = discretize(illustrative_problem(unit_interval, 0, 1, 0, 1))
    assert len(dp.grid) == 65
    assert not dp.exact
    assert len(discretize(illustrative_problem(unit_interval, 0, 1, 0, 1), refine=2).grid) == 257
    mixed = discretize(illustrative_problem(mixed_scale, 0, 2, 0, 1))
    assert mixed.grid[0] == 0
    assert mixed.grid[1:] == pytest.approx(np.linspace(1, 2, 65))
    with pytest.raises(ValueError):
        discretize(illustrative_problem(unit_interval, 0, 1, 0, 1), refine=-1)


def test_discretized_problem_validation():
    with pytest.raises(ValueError):
        DiscretizedProblem((0.0,), 0, 1, quadratic_energy())
    with pytest.raises(ValueError):
        DiscretizedProblem((0.0, 1.0, 1.0), 0, 1, quadratic_energy())
    dp = DiscretizedProblem((0.0, 1.0, 2.0), 0, 1, quadratic_energy())
    with pytest.raises(ValueError):
        dp.objective([1.0, 2.0])


def test_objective_on_three_points(three_points):
    dp = discretize(illustrative_problem(three_points, 0, 2, 0, 2))
    # 2y² - 4y + 8
    for y in (-1.0, 0.0, 1.0, 2.5):
        assert dp.objective([y]) == 2 * y**2 - 4 * y + 8


def test_objective_equals_functional(scattered_scale):
    p = illustrative_problem(scattered_scale, scattered_scale.min, scattered_scale.max, 1.0, -2.0)
    dp = discretize(p)
    for seed in range(100):
        x = random_admissible(p, seed)
        assert dp.objective(dp.sample(x)) == pytest.approx(evaluate_functional(p, x), rel=1e-12, abs=1e-12)


def test_solve_quadratic_on_three_points(three_points):
    result = solve_quadratic(discretize(illustrative_problem(three_points, 0, 2, 0, 2)))
    assert result.method is OracleMethod.QUADRATIC
    assert result.argmin == pytest.approx([0, 1, 2], abs=1e-12)
    assert result.value == pytest.approx(6, abs=1e-12)
    assert result.converged
    assert set(result.to_json()) == {"method", "value", "argmin", "converged"}
    assert result.to_json()["method"] == "quadratic"


@pytest.mark.parametrize(
    "scale",
    [integers(0, 2), integers(0, 10), integers(0, 100), hstep(0, 2, 0.25), qscale(2, 0, 6)],
    ids=["z2", "z10", "z100", "hstep", "qscale"],
)
def test_solve_quadratic_matches_closed_form(scale):
    p = illustrative_problem(scale, scale.min, scale.max, 1.0, -3.0)
    x_star = leitmann_minimizer(p)
    result = solve_quadratic(discretize(p))
    assert result.argmin == pytest.approx(grid_values(discretize(p), x_star).tolist(), abs=1e-9)
    assert result.value == pytest.approx(evaluate_functional(p, x_star), abs=1e-9)


def test_solve_quadratic_on_mixed_scale(mixed_scale):
    p = illustrative_problem(mixed_scale, 0, 2, 0, 1)
    dp = discretize(p)
    x_star = leitmann_minimizer(p)
    result = solve_quadratic(dp)
    assert result.argmin == pytest.approx(grid_values(dp, x_star).tolist(), abs=1e-9)
    assert result.value == pytest.approx(dp.objective(dp.sample(x_star)), abs=1e-9)
    assert result.value == pytest.approx(evaluate_functional(p, x_star), abs=1e-6)


def test_solve_quadratic_on_trivial_problem():
    dp = discretize(VariationalProblem(qscale(2, 0, 6), 1, 64, 0, 0, quadratic_energy()))
    result = solve_quadratic(dp)
    assert result.argmin == pytest.approx([0] * 7, abs=1e-12)
    assert result.value == pytest.approx(0, abs=1e-12)


def test_solve_quadratic_without_free_variables():
    result = solve_quadratic(DiscretizedProblem((0.0, 1.0), 0, 2, illustrative_lagrangian()))
    assert result.argmin == [0, 2]
    assert result.value == 4 + 2


def test_refinement_consistency(unit_interval):
    # The continuum value of the minimizer x(t) = t on [0, 1] is ∫ (1 + 2t) dt = 2
    p = illustrative_problem(unit_interval, 0, 1, 0, 1)
    errors = [abs(solve_quadratic(discretize(p, refine)).value - 2) for refine in (0, 1, 2)]
    assert all(error <= 1e-12 for error in errors)
    assert errors[2] <= errors[1] + 1e-12 <= errors[0] + 2e-12


def test_solve_quadratic_rejects_non_quadratic():
    quartic = Lagrangian(lambda t, y, v: v**4 + y)
    with pytest.raises(WrongOracleError):
        solve_quadratic(discretize(VariationalProblem(integers(0, 4), 0, 4, 0, 1, quartic)))


@pytest.mark.parametrize(
    "lagrangian",
    [Lagrangian(lambda t, y, v: y), Lagrangian(lambda t, y, v: -(v**2))],
    ids=["linear", "concave"],
)
def test_solve_quadratic_degenerate(lagrangian):
    with pytest.raises(DegeneracyError):
        solve_quadratic(discretize(VariationalProblem(integers(0, 4), 0, 4, 0, 1, lagrangian)))


def test_solve_generic_agrees_with_quadratic(three_points):
    dp = discretize(illustrative_problem(three_points, 0, 2, 0, 2))
    generic = solve_generic(dp, restarts=3, seed=1)
    quadratic = solve_quadratic(dp)
    assert generic.method is OracleMethod.GENERIC
    assert generic.converged
    assert generic.value == pytest.approx(quadratic.value, abs=1e-8)
    assert generic.argmin == pytest.approx(quadratic.argmin, abs=1e-6)


def test_solve_generic_on_hstep():
    dp = discretize(illustrative_problem(hstep(0, 1, 0.5), 0, 1, 0, 1))
    result = solve_generic(dp)
    assert result.argmin == pytest.approx([0, 0.5, 1], abs=1e-6)
    assert result.value == pytest.approx(solve_quadratic(dp).value, abs=1e-8)


def test_solve_generic_curved_minimizer():
    lagrangian = Lagrangian(lambda t, y, v: v**2 + y**2)
    dp = discretize(VariationalProblem(hstep(0, 1, 0.25), 0, 1, 0, 1, lagrangian))
    quadratic = solve_quadratic(dp)
    generic = solve_generic(dp, restarts=2, seed=3)
    assert generic.value == pytest.approx(quadratic.value, abs=1e-8)
    assert generic.argmin == pytest.approx(quadratic.argmin, abs=1e-4)
    assert quadratic.argmin[1] < 0.25


def test_solve_generic_zero_lagrangian(three_points):
    dp = discretize(VariationalProblem(three_points, 0, 2, 0, 2, Lagrangian(lambda t, y, v: 0.0)))
    result = solve_generic(dp)
    assert result.value == 0
    assert result.converged
    assert result.argmin[0] == 0 and result.argmin[-1] == 2


def test_solve_generic_non_quadratic():
    quartic = Lagrangian(lambda t, y, v: v**4 + y)
    dp = discretize(VariationalProblem(integers(0, 4), 0, 4, 0, 1, quartic))
    result = solve_generic(dp, restarts=2)
    assert result.converged
    assert result.value < dp.objective(dp.linear_start())
    assert result.argmin[0] == 0 and result.argmin[-1] == 1


def test_solve_generic_requires_restarts(three_points):
    with pytest.raises(ValueError):
        solve_generic(discretize(illustrative_problem(three_points, 0, 2, 0, 2)), restarts=0)


def test_grid_values(mixed_scale):
    dp = discretize(illustrative_problem(TimeScale([Point(0.0), Interval(1.0, 2.0)]), 0, 2, 0, 1))
    values = grid_values(dp, Trajectory.from_rule(mixed_scale, lambda t: 3 * t))
    assert values[0] == 0
    assert values[-1] == 6
    assert len(values) == len(dp.grid)


@pytest.mark.parametrize(
    "scale, alpha, beta, expected",
    [(integers(0, 2), 0, 2, [0, 1, 2]), (hstep(0, 1, 0.5), 0, 1, [0, 0.5, 1]), (integers(3, 5), 1, 1, [1, 1, 1])],
    ids=["z2", "hstep", "shifted"],
)
def test_solve_quadratic_single_free_variable(scale, alpha, beta, expected):
    dp = discretize(illustrative_problem(scale, scale.min, scale.max, alpha, beta))
    assert dp.n_free == 1
    result = solve_quadratic(dp)
    assert result.argmin == pytest.approx(expected, abs=1e-12)
    assert result.value == pytest.approx(dp.objective([expected[1]]), abs=1e-12)


@pytest.mark.parametrize(
    "lagrangian",
    [Lagrangian(lambda t, y, v: y), Lagrangian(lambda t, y, v: -(v**2))],
    ids=["linear", "concave"],
)
def test_solve_quadratic_degenerate_single_free_variable(lagrangian, three_points):
    with pytest.raises(DegeneracyError):
        solve_quadratic(discretize(VariationalProblem(three_points, 0, 2, 0, 1, lagrangian)))
