# ##### BEGIN GPL LICENSE BLOCK #####
#
# This file is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This file is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this file.  If not, see <http://www.gnu.org/licenses/>.
#
# ##### END GPL LICENSE BLOCK #####
"""
An optimal control problem on a time scale with control driven dynamics

    x₁^Δ = exp(u₁) + u₁ + u₂,    x₂^Δ = u₂,

the cost ∫ (u₁² + u₂²) Δt, fixed end points and box constraints on the controls. The family of transformations
x^s = x + s·t, u₂^s = u₂ + s leaves the dynamics invariant and shifts the cost by a constant, which solves the
problem without necessary conditions.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Optional, TextIO, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from .delta_calculus import ScaleFunction, delta_derivative, delta_integral, kappa_samples, sample_dense
from .enums import Verdict
from .errors import NoInvariantSolutionError
from .timescale import Interval, Point, TimeScale
from .variational import CSV_FORMAT, N_DENSE_EXPORT, SegmentRule, Trajectory, sample_points

FEASIBILITY_TOL = 1e-9
TOL_INVARIANCE_SCATTERED = 1e-12
TOL_INVARIANCE_DENSE = 1e-8
DENSE_SAMPLES = 64
THETA_BRACKET = (-2.0, 2.0)
THETA_XTOL = 1e-13

ControlRule = Callable[[float, float], float]
Box = tuple[float, float]


@dataclass(frozen=True)
class ControlPair:
    """The controls u₁ and u₂ as functions on the time scale."""

    u1: ScaleFunction
    u2: ScaleFunction

    def __call__(self, t: float) -> tuple[float, float]:
        return self.u1(t), self.u2(t)

    @classmethod
    def constant(cls, u1: float, u2: float) -> ControlPair:
        """Constant controls."""
        return cls(ScaleFunction.constant(u1), ScaleFunction.constant(u2))

    @property
    def breaks(self) -> tuple[float, ...]:
        """The union of the breaks of both controls."""
        return tuple(sorted(set(self.u1.breaks) | set(self.u2.breaks)))

    def sample(self, nodes: np.ndarray, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Both controls at `nodes` inside the piece [lo, hi] of a dense segment."""
        return sample_dense(self.u1, nodes, lo, hi), sample_dense(self.u2, nodes, lo, hi)


@dataclass(frozen=True)
class ControlState:
    """The simulated states x₁ and x₂."""

    x1: ScaleFunction
    x2: ScaleFunction

    def __call__(self, t: float) -> tuple[float, float]:
        return self.x1(t), self.x2(t)


def _exp_dynamics(u1: float, u2: float) -> float:
    return math.exp(u1) + u1 + u2


def _second_dynamics(u1: float, u2: float) -> float:  # pylint: disable=unused-argument
    return u2


def _quadratic_cost(u1: float, u2: float) -> float:
    return u1**2 + u2**2


def _sample_rule(rule: ControlRule, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """`rule` applied elementwise, the rules take floats."""
    return np.array([rule(*args) for args in zip(u1.tolist(), u2.tolist())], dtype=float)


def _driven(rule: ControlRule, u: ControlPair) -> ScaleFunction:
    """t → rule(u₁(t), u₂(t))"""
    return ScaleFunction(
        lambda t: rule(*u(t)), breaks=u.breaks, dense=lambda nodes, lo, hi: _sample_rule(rule, *u.sample(nodes, lo, hi))
    )


@dataclass(frozen=True)
class ControlProblem:  # pylint: disable=too-many-instance-attributes
    """
    Minimize ∫ running_cost(u₁, u₂) Δt over [t_start, t_end] subject to x^Δ = dynamics(u), x(t_start) = initial,
    x(t_end) = terminal and the control boxes.
    """

    ts: TimeScale
    running_cost: ControlRule = _quadratic_cost
    dynamics: tuple[ControlRule, ControlRule] = (_exp_dynamics, _second_dynamics)
    initial: tuple[float, float] = (0.0, 0.0)
    terminal: tuple[float, float] = (2.0, 1.0)
    box_u1: Box = (-1.0, 1.0)
    box_u2: Box = (-1.0, 1.0)
    t_start: float = 0.0
    t_end: float = 1.0

    def __post_init__(self) -> None:
        for name, (lower, upper) in (("u1", self.box_u1), ("u2", self.box_u2)):
            if not lower <= upper:
                raise ValueError(f"The control box of {name} is not ordered: [{lower}, {upper}].")
        if not self.t_start < self.t_end:
            raise ValueError(f"The horizon [{self.t_start}, {self.t_end}] must satisfy t_start < t_end.")
        object.__setattr__(self, "t_start", self.ts.snap(self.t_start))
        object.__setattr__(self, "t_end", self.ts.snap(self.t_end))

    @cached_property
    def scale(self) -> TimeScale:
        """The time scale [t_start, t_end] ∩ T."""
        return self.ts.restrict(self.t_start, self.t_end)

    @property
    def span(self) -> float:
        """t_end - t_start"""
        return self.t_end - self.t_start

    def rates(self, u: ControlPair) -> tuple[ScaleFunction, ScaleFunction]:
        """The right-hand sides t → dynamics(u(t)) of both state equations."""
        return _driven(self.dynamics[0], u), _driven(self.dynamics[1], u)


def shipped_control_problem(ts: TimeScale) -> ControlProblem:
    """
    The worked example: x₁(0) = x₂(0) = 0, x₁(1) = 2, x₂(1) = 1 and u₁, u₂ ∈ [-1, 1] with the cost ∫₀¹ (u₁² + u₂²) Δt.
    """
    return ControlProblem(ts)


def _integrate_state(scale: TimeScale, rate: ScaleFunction, start: float) -> ScaleFunction:
    """
    The solution of x^Δ = rate with x(min) = start. Right-scattered points are stepped with
    x(σ(t)) = x(t) + μ(t)·rate(t), dense segments are integrated by quadrature.
    """
    anchors: dict[float, float] = {}
    value = start
    for component in scale.components:
        anchors[component.lo] = value
        if isinstance(component, Interval):
            value = value + delta_integral(scale, rate, component.lo, component.hi)
        mu = scale.graininess(component.hi)
        if mu > 0:
            value = value + mu * rate(component.hi)

    def state(t: float) -> float:
        t = scale.snap(t)
        component = scale.components[scale.locate(t)]
        if isinstance(component, Point) or t == component.lo:
            return anchors[component.lo]
        return anchors[component.lo] + delta_integral(scale, rate, component.lo, t)

    return ScaleFunction(state, breaks=rate.breaks, derivative=rate)


def simulate(p: ControlProblem, u: ControlPair) -> ControlState:
    """
    Propagate the state from x(t_start) = initial. Since the dynamics do not depend on the state, the states are delta
    integrals of the control driven rates.

    Parameters
    ----------
    p: ControlProblem
        The control problem.
    u: ControlPair
        The controls, evaluable on [t_start, t_end]^κ.

    Returns
    -------
    ControlState
        The states. On purely scattered time scales they follow the recurrence x(σ(t)) = x(t) + μ(t)·f(u(t)) exactly.
    """
    first, second = p.rates(u)
    return ControlState(_integrate_state(p.scale, first, p.initial[0]), _integrate_state(p.scale, second, p.initial[1]))


def cost(p: ControlProblem, u: ControlPair) -> float:
    """
    The cost ∫ running_cost(u₁(t), u₂(t)) Δt over [t_start, t_end].
    """
    return delta_integral(p.scale, _driven(p.running_cost, u), p.t_start, p.t_end)


def control_samples(p: ControlProblem, n_dense: int = DENSE_SAMPLES) -> list[float]:
    """The points of [t_start, t_end]^κ where the controls are checked, dense segment ends included."""
    scale = p.scale
    return [t for t in sample_points(scale, n_dense) if scale.in_kappa(t)]


@dataclass
class FeasibilityReport:
    """The result of a feasibility check."""

    feasible: bool
    max_box_violation: float
    endpoint_errors: tuple[float, float]
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.feasible

    def __str__(self) -> str:
        lines = [
            f"Feasible         : {self.feasible}",
            f"Box violation    : {self.max_box_violation:.3e}",
            f"End point errors : {self.endpoint_errors[0]:.3e}, {self.endpoint_errors[1]:.3e}",
        ]
        lines.extend(f"Violation        : {violation}" for violation in self.violations)
        return "\n".join(lines)


def _box_violation(value: float, box: Box) -> float:
    return max(box[0] - value, value - box[1], 0.0)


def feasible(p: ControlProblem, u: ControlPair, tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    """
    Check the control boxes on [t_start, t_end]^κ and the terminal conditions of the simulated state.

    Parameters
    ----------
    p: ControlProblem
        The control problem.
    u: ControlPair
        The controls to check.
    tol: float, default=1e-9
        The absolute tolerance of both checks.

    Returns
    -------
    FeasibilityReport
        The report, which evaluates to True if the controls are feasible.
    """
    violations = []
    worst = 0.0
    for t in control_samples(p):
        u1, u2 = u(t)
        violation = max(_box_violation(u1, p.box_u1), _box_violation(u2, p.box_u2))
        if not math.isfinite(violation):
            violation = math.inf
        worst = max(worst, violation)
    if not worst <= tol:
        violations.append(f"The controls leave the box by {worst:.3e}.")
    state = simulate(p, u)
    end = state(p.t_end)
    errors = (abs(end[0] - p.terminal[0]), abs(end[1] - p.terminal[1]))
    for index, error in enumerate(errors, start=1):
        if not error <= tol:
            violations.append(f"x{index}({p.t_end}) = {end[index - 1]!r} misses {p.terminal[index - 1]!r}.")
    return FeasibilityReport(not violations, worst, errors, violations)


def _shift(f: ScaleFunction, rate: float) -> ScaleFunction:
    """t → f(t) + rate·t"""
    derivative = None if f.derivative is None else (lambda t: f.derivative(t) + rate)  # type: ignore[misc]
    return ScaleFunction(lambda t: f(t) + rate * t, breaks=f.breaks, derivative=derivative)


def s_transform(s: float, u: ControlPair, x: ControlState) -> tuple[ControlPair, ControlState]:
    """
    The invariance transformation x₁^s = x₁ + s·t, x₂^s = x₂ + s·t, u₁^s = u₁, u₂^s = u₂ + s. s = 0 is the identity.
    """
    if s == 0:
        return u, x
    return ControlPair(u.u1, _offset(u.u2, s)), ControlState(_shift(x.x1, s), _shift(x.x2, s))


def s_inverse(s: float, u: ControlPair, x: ControlState) -> tuple[ControlPair, ControlState]:
    """Pull a solution of the s-problem back to the original problem."""
    return s_transform(-s, u, x)


@dataclass(frozen=True)
class SParamFamily:
    """
    The member s of the invariance family of a control problem.
    """

    base: ControlProblem
    s: float

    def problem(self) -> ControlProblem:
        """
        The transformed problem: the same cost and dynamics, end points shifted by s·t and the box of u₂ shifted by s.
        s = 0 returns the original problem.
        """
        if self.s == 0:
            return self.base
        p, s = self.base, self.s
        return replace(
            p,
            initial=(p.initial[0] + s * p.t_start, p.initial[1] + s * p.t_start),
            terminal=(p.terminal[0] + s * p.t_end, p.terminal[1] + s * p.t_end),
            box_u2=(p.box_u2[0] + s, p.box_u2[1] + s),
        )

    def expected_cost_gap(self) -> float:
        """
        cost(u^s) - cost(u) = s²·(t_end - t_start) + 2s·(x₂(t_end) - x₂(t_start)) for every control feasible for the
        end point data of the quadratic cost.
        """
        p, s = self.base, self.s
        return s**2 * p.span + 2 * s * (p.terminal[1] - p.initial[1])


@dataclass
class InvarianceReport:  # pylint: disable=too-many-instance-attributes
    """The outcome of an invariance check for one member of the family."""

    s: float
    cost_gap: float
    expected_gap: float
    boundary_gap: float
    max_dynamics_residual: float
    points_checked: int
    tolerance: float
    verdict: Verdict

    @property
    def passed(self) -> bool:
        """True if the verdict is pass."""
        return self.verdict is Verdict.PASS

    def to_json(self) -> dict[str, Any]:
        """The report as a JSON serializable dict."""
        return {
            "s": self.s,
            "cost_gap": self.cost_gap,
            "expected_gap": self.expected_gap,
            "boundary_gap": self.boundary_gap,
            "max_dynamics_residual": self.max_dynamics_residual,
            "points_checked": self.points_checked,
            "tolerance": self.tolerance,
            "verdict": self.verdict.value,
        }

    def __str__(self) -> str:
        return (
            f"s                : {self.s:g}\n"
            f"Cost gap         : {self.cost_gap:.15g} (expected {self.expected_gap:.15g})\n"
            f"Boundary gap     : {self.boundary_gap:.15g}\n"
            f"Dynamics residual: {self.max_dynamics_residual:.3e}\n"
            f"Verdict          : {self.verdict.value}"
        )


def default_invariance_tolerance(scale: TimeScale) -> float:
    """1e-12 on purely scattered time scales, 1e-8 if there are dense segments."""
    return TOL_INVARIANCE_SCATTERED if scale.is_scattered else TOL_INVARIANCE_DENSE


def check_invariance(p: ControlProblem, s: float, u: ControlPair, tol: Optional[float] = None) -> InvarianceReport:
    """
    Verify the invariance of the problem under the member s of the family along the controls u.

    The controls must satisfy the end point conditions of `p`. The check compares the cost gap cost(u^s) - cost(u)
    with s²·(t_end - t_start) + 2s·(x₂(t_end) - x₂(t_start)), both evaluated from the end point data and from the
    simulated state, and checks that the transformed states satisfy the dynamics driven by the transformed controls
    at every sample point of [t_start, t_end]^κ.

    Parameters
    ----------
    p: ControlProblem
        The original problem.
    s: float
        The family parameter.
    u: ControlPair
        Controls feasible for the end point data of `p`.
    tol: float, optional
        The tolerance of the gaps and residuals. Defaults to 1e-12 on purely scattered scales and 1e-8 otherwise.

    Returns
    -------
    InvarianceReport
        The report. Failed checks are reported, never raised.
    """
    scale = p.scale
    if tol is None:
        tol = default_invariance_tolerance(scale)
    family = SParamFamily(p, s)
    state = simulate(p, u)
    u_s, x_s = s_transform(s, u, state)
    transformed = family.problem()

    cost_gap = cost(transformed, u_s) - cost(p, u)
    expected = family.expected_cost_gap()
    boundary = s**2 * p.span + 2 * s * (state.x2(p.t_end) - state.x2(p.t_start))

    first, second = transformed.rates(u_s)
    points = kappa_samples(scale, DENSE_SAMPLES)
    residual = 0.0
    for t in points:
        residual = max(
            residual,
            abs(delta_derivative(scale, x_s.x1, t) - first(t)),
            abs(delta_derivative(scale, x_s.x2, t) - second(t)),
        )
    passed = abs(cost_gap - expected) <= tol and abs(cost_gap - boundary) <= tol and residual <= tol
    report = InvarianceReport(
        s, cost_gap, expected, boundary, residual, len(points), tol, Verdict.PASS if passed else Verdict.FAIL
    )
    if not passed:
        logging.getLogger(__name__).warning("Invariance check failed for s=%g:\n%s", s, report)
    return report


@dataclass
class InvarianceSolution:
    """The absolute minimizer found by the invariance argument."""

    s_star: float
    minimizer: ControlPair
    min_cost: float
    state: ControlState
    terminal: tuple[float, float]

    def to_json(self) -> dict[str, Any]:
        """The solution as a JSON serializable dict."""
        return {
            "s_star": self.s_star,
            "min_cost": self.min_cost,
            "terminal_state": list(self.terminal),
        }

    def __str__(self) -> str:
        return (
            f"s*               : {self.s_star:g}\n"
            f"Minimum cost     : {self.min_cost:.15g}\n"
            f"Terminal state   : ({self.terminal[0]:.15g}, {self.terminal[1]:.15g})"
        )


def _endpoint_parameter(p: ControlProblem, index: int, rate: float) -> float:
    """
    The s for which the zero control flow x(t) = x(t_start) + rate·(t - t_start) of the s-problem hits its terminal
    condition.
    """
    return (p.initial[index] - p.terminal[index]) / p.span + rate


def solve_by_invariance(p: ControlProblem, log_level: int = logging.WARNING) -> InvarianceSolution:
    """
    Find the member s* of the invariance family for which the zero controls are admissible. The zero controls
    minimize the nonnegative cost of the s*-problem, so pulling them back gives the absolute minimizer of `p` with the
    cost 0 - cost gap.

    Parameters
    ----------
    p: ControlProblem
        A problem with the shipped dynamics and the quadratic cost.
    log_level: int, default=logging.WARNING
        The level of logging output.

    Returns
    -------
    InvarianceSolution
        s*, the minimizer, its cost and its simulated state.

    Raises
    ------
    NoInvariantSolutionError
        If the end point equations of both states give different values of s, or the zero control violates the
        shifted control box.
    """
    logger = logging.getLogger(__name__)
    logger.setLevel(log_level)
    first, second = p.dynamics
    s_first = _endpoint_parameter(p, 0, first(0.0, 0.0))
    s_second = _endpoint_parameter(p, 1, second(0.0, 0.0))
    if not abs(s_first - s_second) <= 1e-12 * max(1.0, abs(s_first)):
        raise NoInvariantSolutionError(
            f"The end point equations require s={s_first!r} (first state) and s={s_second!r} (second state).",
            s_first,
            s_second,
        )
    s_star = s_first
    transformed = SParamFamily(p, s_star).problem()
    if _box_violation(0.0, transformed.box_u1) > 0 or _box_violation(0.0, transformed.box_u2) > 0:
        raise NoInvariantSolutionError(
            f"The zero control is outside of the control box of the s={s_star!r} problem.", s_star, s_star
        )
    logger.info("The zero control is admissible for s* = %g.", s_star)

    zero = ControlPair.constant(0.0, 0.0)
    zero_state = simulate(transformed, zero)
    minimizer, state = s_inverse(s_star, zero, zero_state)
    min_cost = cost(transformed, zero) - SParamFamily(p, s_star).expected_cost_gap()
    terminal = state(p.t_end)
    logger.info("Minimum cost %.15g, terminal state (%.15g, %.15g).", min_cost, *terminal)
    return InvarianceSolution(s_star, minimizer, min_cost, state, terminal)


def _random_signal(scale: TimeScale, rng: np.random.Generator, centre: float, magnitude: float) -> ScaleFunction:
    """Uniform values on the isolated points and a random cubic on every dense segment, within centre ± magnitude."""
    values = {}
    rules = []
    for component in scale.components:
        if isinstance(component, Point):
            values[component.t] = centre + magnitude * rng.uniform(-1, 1)
        else:
            coefficients = magnitude * rng.uniform(-1, 1, size=4) / 4
            coefficients[0] += centre
            signal = Polynomial(coefficients, domain=[component.lo, component.hi], window=[-1, 1])
            rules.append(SegmentRule(signal, signal.deriv(), vectorized=True))
    return Trajectory(scale, values, rules).function


def _offset(f: ScaleFunction, offset: float) -> ScaleFunction:
    return ScaleFunction(
        lambda t: f(t) + offset, breaks=f.breaks, dense=lambda nodes, lo, hi: sample_dense(f, nodes, lo, hi) + offset
    )


def random_feasible_controls(  # pylint: disable=too-many-arguments
    p: ControlProblem,
    seed: int,
    magnitude: float = 0.5,
    u2_magnitude: float = 0.0,
    enforce_box: bool = True,
    max_attempts: int = 100,
) -> ControlPair:
    """
    Random controls satisfying the end point conditions. u₁ is drawn around 0 and u₂ around 1, then u₂ is shifted
    uniformly to satisfy the second terminal condition and u₁ by the uniform offset solving the first one, found by
    bisection. Draws leaving the control box are discarded if `enforce_box` is set.

    Parameters
    ----------
    p: ControlProblem
        A problem with the shipped dynamics.
    seed: int
        The seed of the random generator.
    magnitude: float, default=0.5
        The size of the perturbation of u₁.
    u2_magnitude: float, default=0.0
        The size of the perturbation of u₂. With the shipped data the box and the second terminal condition force
        u₂ ≡ 1, so perturbing u₂ only makes sense together with ``enforce_box=False``.
    enforce_box: bool, default=True
        Discard draws that leave the control box.
    max_attempts: int, default=100
        The maximum number of draws.

    Returns
    -------
    ControlPair
        Feasible controls.

    Raises
    ------
    ValueError
        If no feasible draw was found.
    """
    if magnitude < 0 or u2_magnitude < 0:
        raise ValueError(f"The magnitudes must be nonnegative, got {magnitude} and {u2_magnitude}.")
    rng = np.random.default_rng(seed)
    scale = p.scale
    target_first = p.terminal[0] - p.initial[0]
    target_second = p.terminal[1] - p.initial[1]
    first, _ = p.dynamics
    for _ in range(max_attempts):
        base_u1 = _random_signal(scale, rng, 0.0, magnitude)
        base_u2 = _random_signal(scale, rng, 1.0, u2_magnitude)
        u2 = _offset(base_u2, (target_second - delta_integral(scale, base_u2, p.t_start, p.t_end)) / p.span)

        def mismatch(theta: float, base_u1=base_u1, u2=u2) -> float:
            rate = _driven(first, ControlPair(_offset(base_u1, theta), u2))
            return delta_integral(scale, rate, p.t_start, p.t_end) - target_first

        if mismatch(THETA_BRACKET[0]) * mismatch(THETA_BRACKET[1]) > 0:
            continue
        theta = bisect(mismatch, *THETA_BRACKET, xtol=THETA_XTOL)
        controls = ControlPair(_offset(base_u1, theta), u2)
        if not enforce_box or feasible(p, controls):
            return controls
    raise ValueError(f"No feasible controls found in {max_attempts} attempts.")


def write_control_csv(
    target: Union[str, Path, TextIO],
    p: ControlProblem,
    u: ControlPair,
    state: Optional[ControlState] = None,
    n_dense: int = N_DENSE_EXPORT,
) -> None:
    """
    Export controls and states with the header ``t,u1,u2,x1,x2``. The controls are left empty outside of
    [t_start, t_end]^κ.
    """
    if isinstance(target, (str, Path)):
        with Path(target).open("w", newline="", encoding="utf-8") as file:
            write_control_csv(file, p, u, state, n_dense)
        return
    if state is None:
        state = simulate(p, u)
    scale = p.scale
    writer = csv.writer(target)
    writer.writerow(["t", "u1", "u2", "x1", "x2"])
    for t in sample_points(scale, n_dense):
        controls = [format(value, CSV_FORMAT) for value in u(t)] if scale.in_kappa(t) else ["", ""]
        writer.writerow([format(t, CSV_FORMAT), *controls, *(format(value, CSV_FORMAT) for value in state(t))])
