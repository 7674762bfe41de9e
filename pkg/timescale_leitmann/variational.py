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
The fundamental problem of the calculus of variations on time scales: minimize
L[x] = ∫_a^b L(t, x^σ(t), x^Δ(t)) Δt over admissible trajectories with x(a) = α and x(b) = β.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, TextIO, Union

import numpy as np
from numpy.polynomial import Polynomial

from .delta_calculus import ScaleFunction, delta_derivative, delta_integral, dense_delta_derivative, sample_dense
from .errors import DegenerateIntervalError, TimeScaleError
from .timescale import Interval, Point, TimeScale

ADMISSIBILITY_TOL = 1e-9
N_DENSE_EXPORT = 101
CSV_FORMAT = ".17g"

LagrangianRule = Callable[[float, float, float], float]


def sample_points(ts: TimeScale, n_dense: int = N_DENSE_EXPORT) -> list[float]:
    """
    Every isolated point of `ts` plus `n_dense` evenly spaced samples of every dense segment, both ends included.
    """
    samples: list[float] = []
    for component in ts.components:
        if isinstance(component, Point):
            samples.append(component.t)
        else:
            samples.extend(float(t) for t in np.linspace(component.lo, component.hi, n_dense))
    return samples


@dataclass(frozen=True)
class Lagrangian:
    """
    A Lagrangian (t, y, v) → L(t, y, v), where y stands for x^σ(t) and v for x^Δ(t). The partial derivatives are
    optional, finite differences are used if they are not supplied. Set `vectorized` if `rule` accepts numpy arrays.
    """

    rule: LagrangianRule
    l_y: Optional[LagrangianRule] = None
    l_v: Optional[LagrangianRule] = None
    vectorized: bool = False

    def __call__(self, t: float, y: float, v: float) -> float:
        return float(self.rule(t, y, v))

    def sample(self, t: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
        """L evaluated elementwise on arrays of equal length."""
        if self.vectorized:
            return np.array(np.broadcast_to(np.asarray(self.rule(t, y, v), dtype=float), np.shape(t)), dtype=float)
        return np.array([self(*args) for args in zip(t, y, v)], dtype=float)

    def partial_y(self, t: float, y: float, v: float, h: float = 1e-6) -> float:
        """L_y(t, y, v)"""
        if self.l_y is not None:
            return float(self.l_y(t, y, v))
        return (self(t, y + h, v) - self(t, y - h, v)) / (2 * h)

    def partial_v(self, t: float, y: float, v: float, h: float = 1e-6) -> float:
        """L_v(t, y, v)"""
        if self.l_v is not None:
            return float(self.l_v(t, y, v))
        return (self(t, y, v + h) - self(t, y, v - h)) / (2 * h)

    def scaled(self, factor: float) -> Lagrangian:
        """Returns factor·L."""
        rule = self.rule
        return Lagrangian(lambda t, y, v: factor * rule(t, y, v), vectorized=self.vectorized)


def illustrative_lagrangian() -> Lagrangian:
    """(x^Δ)² + x^σ + t·x^Δ"""
    return Lagrangian(
        lambda t, y, v: v**2 + y + t * v,
        l_y=lambda t, y, v: 1.0,
        l_v=lambda t, y, v: 2 * v + t,
        vectorized=True,
    )


def quadratic_energy() -> Lagrangian:
    """(x^Δ)²"""
    return Lagrangian(lambda t, y, v: v**2, l_y=lambda t, y, v: 0.0, l_v=lambda t, y, v: 2 * v, vectorized=True)


@dataclass(frozen=True)
class VariationalProblem:
    """
    Minimize ∫_a^b L(t, x^σ(t), x^Δ(t)) Δt subject to x(a) = alpha and x(b) = beta.
    """

    ts: TimeScale
    a: float
    b: float
    alpha: float
    beta: float
    lagrangian: Lagrangian

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise DegenerateIntervalError(f"The interval [{self.a}, {self.b}] must satisfy a < b.")
        # Canonical endpoints, raises a MembershipError if they do not belong to the time scale
        object.__setattr__(self, "a", self.ts.snap(self.a))
        object.__setattr__(self, "b", self.ts.snap(self.b))

    @cached_property
    def scale(self) -> TimeScale:
        """The time scale [a, b] ∩ T."""
        return self.ts.restrict(self.a, self.b)

    def with_lagrangian(self, lagrangian: Lagrangian) -> VariationalProblem:
        """The same boundary value problem with another Lagrangian."""
        return VariationalProblem(self.ts, self.a, self.b, self.alpha, self.beta, lagrangian)


def illustrative_problem(ts: TimeScale, a: float, b: float, alpha: float, beta: float) -> VariationalProblem:
    """
    Minimize ∫_a^b ((x^Δ)² + x^σ + t·x^Δ) Δt with x(a) = alpha, x(b) = beta.
    """
    return VariationalProblem(ts, a, b, alpha, beta, illustrative_lagrangian())


@dataclass(frozen=True)
class SegmentRule:
    """The rule of a trajectory on one dense segment. `vectorized` rules also accept numpy arrays."""

    value: Callable[[float], float]
    derivative: Optional[Callable[[float], float]] = None
    vectorized: bool = False


class Trajectory:
    """
    A function on a time scale given by its values at the isolated points and by an evaluable rule on every dense
    segment. Instances are immutable.
    """

    def __init__(
        self,
        ts: TimeScale,
        point_values: Mapping[float, float],
        segment_rules: Sequence[SegmentRule],
        corners: Iterable[float] = (),
    ):
        """
        Parameters
        ----------
        ts: TimeScale
            The time scale the trajectory lives on.
        point_values: Mapping of float to float
            The value at every isolated point of `ts`.
        segment_rules: Sequence of SegmentRule
            One rule per dense segment of `ts`, in increasing order.
        corners: Iterable of float, default=()
            Points of dense segments where the trajectory may have a kink.
        """
        self.__ts = ts
        points = [component.t for component in ts.components if isinstance(component, Point)]
        missing = [t for t in points if t not in point_values]
        if missing:
            raise ValueError(f"Missing values at the isolated points {missing}.")
        self.__values = {t: float(point_values[t]) for t in points}
        intervals = [index for index, component in enumerate(ts.components) if isinstance(component, Interval)]
        if len(intervals) != len(segment_rules):
            raise ValueError(f"Expected {len(intervals)} segment rules, got {len(segment_rules)}.")
        self.__rules = dict(zip(intervals, segment_rules))
        self.__corners = tuple(sorted(corners))

    @property
    def ts(self) -> TimeScale:
        """
        The time scale of the trajectory.
        """
        return self.__ts

    @property
    def corners(self) -> tuple[float, ...]:
        """
        The declared corner points.
        """
        return self.__corners

    def __call__(self, t: float) -> float:
        index = self.__ts.locate(t)
        component = self.__ts.components[index]
        if isinstance(component, Point):
            return self.__values[component.t]
        return float(self.__rules[index].value(self.__ts.snap(t)))

    def __derivative(self, t: float) -> float:
        index = self.__ts.locate(t)
        rule = self.__rules[index]
        assert rule.derivative is not None
        return float(rule.derivative(self.__ts.snap(t)))

    def __dense(self, nodes: np.ndarray, lo: float, _hi: float) -> np.ndarray:
        rule = self.__rules[self.__ts.locate(lo)]
        if rule.vectorized:
            return np.asarray(rule.value(nodes), dtype=float)
        return np.array([float(rule.value(t)) for t in nodes], dtype=float)

    def __dense_derivative(self, nodes: np.ndarray, lo: float, _hi: float) -> np.ndarray:
        rule = self.__rules[self.__ts.locate(lo)]
        assert rule.derivative is not None
        if rule.vectorized:
            return np.asarray(rule.derivative(nodes), dtype=float)
        return np.array([float(rule.derivative(t)) for t in nodes], dtype=float)

    @property
    def function(self) -> ScaleFunction:
        """
        The trajectory as a :class:`ScaleFunction`. The exact derivative is attached if every segment rule has one.
        """
        exact = all(rule.derivative is not None for rule in self.__rules.values())
        return ScaleFunction(
            self,
            breaks=self.__corners,
            derivative=self.__derivative if exact else None,
            dense=self.__dense,
            dense_derivative=self.__dense_derivative if exact else None,
        )

    @classmethod
    def from_rule(
        cls,
        ts: TimeScale,
        rule: Callable[[float], float],
        derivative: Optional[Callable[[float], float]] = None,
        corners: Iterable[float] = (),
        vectorized: bool = False,
    ) -> Trajectory:
        """
        Sample `rule` at the isolated points and use it on every dense segment. Set `vectorized` if `rule` and
        `derivative` accept numpy arrays.
        """
        values = {component.t: rule(component.t) for component in ts.components if isinstance(component, Point)}
        rules = [SegmentRule(rule, derivative, vectorized) for _ in ts.dense_segments()]
        return cls(ts, values, rules, corners)

    @classmethod
    def from_polynomial(cls, ts: TimeScale, polynomial: Polynomial) -> Trajectory:
        """
        A polynomial trajectory with exact derivatives on the dense segments.
        """
        return cls.from_rule(ts, polynomial, polynomial.deriv(), vectorized=True)

    def map(self, transform: Callable[[float, float], float], vectorized: bool = False) -> Trajectory:
        """
        Returns the pointwise image t → transform(t, x(t)). Set `vectorized` if `transform` accepts numpy arrays.
        """
        values = {t: transform(t, value) for t, value in self.__values.items()}
        rules = [
            SegmentRule(
                lambda t, rule=rule: transform(t, rule.value(t)),  # type: ignore[misc]
                vectorized=vectorized and rule.vectorized,
            )
            for _, rule in sorted(self.__rules.items())
        ]
        return Trajectory(self.__ts, values, rules, self.__corners)

    def sample_points(self, n_dense: int = N_DENSE_EXPORT) -> list[float]:
        """
        Every isolated point plus `n_dense` evenly spaced samples of every dense segment, in increasing order.
        """
        return sample_points(self.__ts, n_dense)

    def to_csv(self, target: Union[str, Path, TextIO], n_dense: int = N_DENSE_EXPORT) -> None:
        """
        Export the trajectory with the header ``t,x,xdelta,xsigma``. The delta derivative is left empty outside of
        T^κ.
        """
        if isinstance(target, (str, Path)):
            with Path(target).open("w", newline="", encoding="utf-8") as file:
                self.to_csv(file, n_dense)
            return
        function = self.function
        writer = csv.writer(target)
        writer.writerow(["t", "x", "xdelta", "xsigma"])
        for t in self.sample_points(n_dense):
            xdelta = format(delta_derivative(self.__ts, function, t), CSV_FORMAT) if self.__ts.in_kappa(t) else ""
            xsigma = format(self(self.__ts.sigma(t)), CSV_FORMAT)
            writer.writerow([format(t, CSV_FORMAT), format(self(t), CSV_FORMAT), xdelta, xsigma])


def linear_interpolant(p: VariationalProblem) -> Trajectory:
    """
    The straight line through (a, alpha) and (b, beta) on [a, b] ∩ T.
    """
    slope = (p.beta - p.alpha) / (p.b - p.a)
    return Trajectory.from_polynomial(p.scale, Polynomial([p.alpha - slope * p.a, slope]))


def _integrand(p: VariationalProblem, x: ScaleFunction, lagrangian: Lagrangian) -> ScaleFunction:
    scale = p.scale

    def dense(nodes: np.ndarray, lo: float, hi: float) -> np.ndarray:
        # σ(t) = t inside a dense piece, the right end is replaced by a left-sided limit where it jumps
        values = sample_dense(x, nodes, lo, hi)
        return lagrangian.sample(nodes, values, dense_delta_derivative(x, nodes, lo, hi, scale.eps_member))

    return ScaleFunction(
        lambda t: lagrangian(t, x(scale.sigma(t)), delta_derivative(scale, x, t)),
        breaks=x.breaks,
        dense=dense,
    )


def evaluate_functional(p: VariationalProblem, x: Union[Trajectory, ScaleFunction], **kwargs) -> float:
    """
    Evaluate L[x] = ∫_a^b L(t, x^σ(t), x^Δ(t)) Δt.

    Parameters
    ----------
    p: VariationalProblem
        The problem defining the Lagrangian and the interval.
    x: Trajectory or ScaleFunction
        A trajectory defined on [a, b] ∩ T.
    kwargs
        Passed on to :func:`delta_integral`.

    Returns
    -------
    float
        The value of the functional. Right-scattered points contribute exact forward differences, dense segments a
        quadrature.
    """
    function = x.function if isinstance(x, Trajectory) else x
    return delta_integral(p.scale, _integrand(p, function, p.lagrangian), p.a, p.b, **kwargs)


@dataclass
class AdmissibilityReport:
    """The result of an admissibility check."""

    admissible: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.admissible

    def __str__(self) -> str:
        if self.admissible:
            return "Admissible"
        return "Not admissible:\n" + "\n".join(f"  - {violation}" for violation in self.violations)


def _corner_jump(x: Trajectory, corner: float, delta: float = 1e-6) -> float:
    """
    Difference of the one-sided limits at a corner, each extrapolated linearly from two nearby values. Nodes outside
    the dense segment of the corner are clamped to its ends, a corner at an end compares the value there with the
    limit from the inside.
    """
    component = x.ts.components[x.ts.locate(corner)]
    if isinstance(component, Point):
        return 0.0
    lo, hi = component.lo, component.hi

    def at(t: float) -> float:
        return x(min(max(t, lo), hi))

    right = 2 * at(corner + delta) - at(corner + 2 * delta)
    left = 2 * at(corner - delta) - at(corner - 2 * delta)
    return abs(right - left)


def check_admissible(p: VariationalProblem, x: Trajectory, tol: float = ADMISSIBILITY_TOL) -> AdmissibilityReport:
    """
    Check the boundary conditions x(a) = alpha, x(b) = beta and the continuity of `x` on its dense segments.

    Parameters
    ----------
    p: VariationalProblem
        The problem defining the boundary conditions.
    x: Trajectory
        The trajectory to check.
    tol: float, default=1e-9
        The absolute tolerance.

    Returns
    -------
    AdmissibilityReport
        The report, which evaluates to True if `x` is admissible.
    """
    violations = []
    try:
        if not abs(x(p.a) - p.alpha) <= tol:
            violations.append(f"x({p.a}) = {x(p.a)} != alpha = {p.alpha}")
        if not abs(x(p.b) - p.beta) <= tol:
            violations.append(f"x({p.b}) = {x(p.b)} != beta = {p.beta}")
        for corner in x.corners:
            jump = _corner_jump(x, corner)
            if not jump <= tol:
                violations.append(f"Discontinuity of size {jump} at the corner {corner}")
        for t in x.sample_points():
            if p.a <= t <= p.b and not math.isfinite(x(t)):
                violations.append(f"x({t}) is not finite")
    except TimeScaleError as exc:
        violations.append(f"The trajectory cannot be evaluated on [a, b]: {exc}")
    if violations:
        logging.getLogger(__name__).debug("Trajectory is not admissible: %s", violations)
    return AdmissibilityReport(not violations, violations)


def random_admissible(p: VariationalProblem, seed: int, magnitude: float = 1.0) -> Trajectory:
    """
    A random admissible trajectory: the linear interpolant plus a perturbation that vanishes at a and b. Isolated
    points get uniform noise in [-magnitude, magnitude] weighted by a hat function, dense segments a cubic bump
    vanishing at both ends of the segment.

    Parameters
    ----------
    p: VariationalProblem
        The problem defining the boundary conditions.
    seed: int
        The seed of the random generator. The same seed returns the same trajectory.
    magnitude: float, default=1.0
        The size of the perturbation.

    Returns
    -------
    Trajectory
        An admissible trajectory on [a, b] ∩ T.
    """
    if magnitude < 0:
        raise ValueError(f"The magnitude must be nonnegative, got {magnitude}.")
    rng = np.random.default_rng(seed)
    slope = (p.beta - p.alpha) / (p.b - p.a)
    line = Polynomial([p.alpha - slope * p.a, slope])
    values: dict[float, float] = {}
    rules: list[SegmentRule] = []
    for component in p.scale.components:
        if isinstance(component, Point):
            hat = 1 - abs(2 * component.t - p.a - p.b) / (p.b - p.a)
            values[component.t] = line(component.t) + magnitude * rng.uniform(-1, 1) * hat
            continue
        lo, hi = component.lo, component.hi
        r_0, r_1 = rng.uniform(-1, 1, size=2)
        tilt = Polynomial([r_0 - r_1 * (lo + hi) / (hi - lo), 2 * r_1 / (hi - lo)])
        bump = -magnitude / ((hi - lo) / 2) ** 2 * Polynomial.fromroots([lo, hi]) * tilt
        path = line + bump
        rules.append(SegmentRule(path, path.deriv(), vectorized=True))
    return Trajectory(p.scale, values, rules)
