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
Leitmann's direct method on time scales. A transformation x = z(t, x̃) with inverse x̃ = z̃(t, x) and a gauge G
satisfying

    L(t, x^σ, x^Δ) - L̃(t, x̃^σ, x̃^Δ) = G^Δ(t, x̃(t))

turns the problem L into L̃ up to the boundary constant G(b, x̃(b)) - G(a, x̃(a)), so minimizers of L̃ are carried
to minimizers of L. This module verifies the identity numerically and transports minimizers.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np

from .delta_calculus import H_NUM, ScaleFunction, delta_derivative, kappa_samples
from .enums import Fault, Verdict
from .errors import DegenerateIntervalError, InconsistentTransformationError, TimeScaleError
from .timescale import TimeScale
from .variational import (
    ADMISSIBILITY_TOL,
    Trajectory,
    VariationalProblem,
    check_admissible,
    evaluate_functional,
    quadratic_energy,
    random_admissible,
)

DENSE_SAMPLES = 64
TOL_RES_DENSE = 1e-8
TOL_RES_SCATTERED = 1e-12
TOL_GAP = 1e-8
INVERSE_TOL = 1e-9

PointRule = Callable[[float, float], float]


@dataclass(frozen=True)
class Transformation:
    """
    The transformation x = z(t, x̃), its inverse x̃ = z_inv(t, x) and the gauge G(t, x̃). Set `vectorized` if z
    accepts numpy arrays.
    """

    z: PointRule
    z_inv: PointRule
    gauge: PointRule
    vectorized: bool = False

    @classmethod
    def identity(cls) -> Transformation:
        """z = z_inv = identity and G ≡ 0."""
        return cls(lambda t, x: x, lambda t, x: x, lambda t, x: 0.0, vectorized=True)

    def inverse_error(self, samples: list[tuple[float, float]]) -> float:
        """
        Returns the largest of |z(t, z_inv(t, x)) - x| and |z_inv(t, z(t, x)) - x| over the samples (t, x).
        """
        errors = [0.0]
        for t, value in samples:
            errors.append(abs(self.z(t, self.z_inv(t, value)) - value))
            errors.append(abs(self.z_inv(t, self.z(t, value)) - value))
        return max(errors)


@dataclass(frozen=True)
class LeitmannPair:
    """
    The original problem, the transformed problem and the transformation connecting them. The boundary values of the
    transformed problem must be x̃(a) = z_inv(a, alpha) and x̃(b) = z_inv(b, beta).
    """

    original: VariationalProblem
    transformed: VariationalProblem
    transform: Transformation

    def __post_init__(self) -> None:
        original, transformed = self.original, self.transformed
        if (original.a, original.b) != (transformed.a, transformed.b) or original.scale != transformed.scale:
            raise InconsistentTransformationError("Both problems must live on the same interval [a, b].")
        expected = (self.transform.z_inv(original.a, original.alpha), self.transform.z_inv(original.b, original.beta))
        if not (
            abs(transformed.alpha - expected[0]) <= INVERSE_TOL and abs(transformed.beta - expected[1]) <= INVERSE_TOL
        ):
            raise InconsistentTransformationError(
                f"The boundary values ({transformed.alpha}, {transformed.beta}) of the transformed problem do not match"
                f" the transformed boundary conditions {expected}."
            )
        samples = [(t, value) for t in (original.a, original.b) for value in (-1.0, 0.0, 1.0)]
        error = self.transform.inverse_error(samples)
        if not error <= INVERSE_TOL:
            raise InconsistentTransformationError(f"z and z_inv are not inverse to each other, error: {error}.")


@dataclass
class VerificationReport:  # pylint: disable=too-many-instance-attributes
    """The outcome of the numerical verification of the fundamental lemma."""

    max_abs_residual: float
    points_checked: int
    functional_gap: float
    gap_constant_spread: float
    verdict: Verdict
    tolerances: dict[str, float]
    boundary_gap: float = math.nan
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True if the verdict is pass."""
        return self.verdict is Verdict.PASS

    def to_json(self) -> dict[str, Any]:
        """The report as a JSON serializable dict."""
        return {
            "max_abs_residual": self.max_abs_residual,
            "points_checked": self.points_checked,
            "functional_gap": self.functional_gap,
            "gap_constant_spread": self.gap_constant_spread,
            "verdict": self.verdict.value,
            "tolerances": dict(self.tolerances),
        }

    def __str__(self) -> str:
        """Pretty-print the report."""
        lines = [
            f"Verdict            : {self.verdict.value}",
            f"Max |residual|     : {self.max_abs_residual:.3e} (tol {self.tolerances.get('tol_res', math.nan):.1e})",
            f"Points checked     : {self.points_checked}",
            f"Functional gap     : {self.functional_gap:.12g}",
            f"Boundary gap G(b)-G(a): {self.boundary_gap:.12g}",
            f"Gap spread         : {self.gap_constant_spread:.3e} (tol {self.tolerances.get('tol_gap', math.nan):.1e})",
        ]
        lines.extend(f"Failure            : {failure}" for failure in self.failures)
        return "\n".join(lines)


def _as_function(x: Union[Trajectory, ScaleFunction]) -> ScaleFunction:
    return x.function if isinstance(x, Trajectory) else x


def identity_residual(
    pair: LeitmannPair, x_tilde: Union[Trajectory, ScaleFunction], t: float, h_num: float = H_NUM
) -> float:
    """
    The residual of the functional identity L(t, x^σ, x^Δ) - L̃(t, x̃^σ, x̃^Δ) - g^Δ(t) with x = z(·, x̃(·)) and
    g(t) = G(t, x̃(t)). The composed function g is delta differentiated as a whole.

    Parameters
    ----------
    pair: LeitmannPair
        The problems and the transformation.
    x_tilde: Trajectory or ScaleFunction
        A trajectory of the transformed problem.
    t: float
        A point of [a, b]^κ.
    h_num: float, default=1e-3
        The step of the difference stencil at right-dense points.

    Returns
    -------
    float
        The residual, zero if the identity holds at t.
    """
    scale = pair.original.scale
    transform = pair.transform
    x_t = _as_function(x_tilde)
    x = ScaleFunction(lambda s: transform.z(s, x_t(s)), breaks=x_t.breaks)
    gauge = ScaleFunction(lambda s: transform.gauge(s, x_t(s)), breaks=x_t.breaks)
    sigma = scale.sigma(t)
    lagrangian = pair.original.lagrangian(t, x(sigma), delta_derivative(scale, x, t, h_num))
    transformed = pair.transformed.lagrangian(t, x_t(sigma), delta_derivative(scale, x_t, t, h_num))
    return lagrangian - transformed - delta_derivative(scale, gauge, t, h_num)


@dataclass
class _TrialResult:
    max_abs_residual: float
    functional_gap: float
    boundary_gap: float


def _run_trial(pair: LeitmannPair, seed: int, magnitude: float, points: list[float]) -> _TrialResult:
    x_tilde = random_admissible(pair.transformed, seed, magnitude)
    residual = max((abs(identity_residual(pair, x_tilde, t)) for t in points), default=0.0)
    x = x_tilde.map(pair.transform.z, vectorized=pair.transform.vectorized)
    gap = evaluate_functional(pair.original, x) - evaluate_functional(pair.transformed, x_tilde)
    gauge = pair.transform.gauge
    boundary = gauge(pair.original.b, x_tilde(pair.original.b)) - gauge(pair.original.a, x_tilde(pair.original.a))
    return _TrialResult(residual, gap, boundary)


def default_residual_tolerance(scale: TimeScale) -> float:
    """1e-12 on purely scattered time scales, 1e-8 if there are dense segments."""
    return TOL_RES_SCATTERED if scale.is_scattered else TOL_RES_DENSE


def verify_lemma(  # pylint: disable=too-many-arguments,too-many-locals
    pair: LeitmannPair,
    trials: int = 100,
    seed: int = 0,
    tol_res: Optional[float] = None,
    tol_gap: float = TOL_GAP,
    magnitude: float = 1.0,
    log_level: int = logging.WARNING,
) -> VerificationReport:
    """
    Verify the fundamental lemma along random admissible trajectories of the transformed problem. Checks that the
    functional identity holds at every sample point and that L[x] - L̃[x̃] is the same constant for every trial,
    equal to G(b, x̃(b)) - G(a, x̃(a)).

    Parameters
    ----------
    pair: LeitmannPair
        The problems and the transformation.
    trials: int, default=100
        The number of random trajectories.
    seed: int, default=0
        The seed from which the per-trial seeds are derived.
    tol_res: float, optional
        The tolerance of the identity residual. Defaults to 1e-12 on purely scattered scales and 1e-8 otherwise.
    tol_gap: float, default=1e-8
        The tolerance of the constant gap.
    magnitude: float, default=1.0
        The size of the random perturbations.
    log_level: int, default=logging.WARNING
        The level of logging output.

    Returns
    -------
    VerificationReport
        The report. Failed checks are reported, never raised.
    """
    if trials < 1:
        raise ValueError(f"At least one trial is required, got {trials}.")
    logger = logging.getLogger(__name__)
    logger.setLevel(log_level)
    scale = pair.original.scale
    if tol_res is None:
        tol_res = default_residual_tolerance(scale)
    tolerances = {"tol_res": tol_res, "tol_gap": tol_gap}
    points = kappa_samples(scale, DENSE_SAMPLES)
    seeds = np.random.SeedSequence(seed).generate_state(trials)

    results: list[_TrialResult] = []
    try:
        for trial, trial_seed in enumerate(seeds):
            result = _run_trial(pair, int(trial_seed), magnitude, points)
            logger.debug(
                "Trial %d: residual %.3e, gap %.15g, boundary gap %.15g.",
                trial,
                result.max_abs_residual,
                result.functional_gap,
                result.boundary_gap,
            )
            results.append(result)
    except (TimeScaleError, ArithmeticError) as exc:
        logger.warning("Verification aborted in trial %d: %s", len(results), exc)
        return VerificationReport(
            math.nan, len(points) * len(results), math.nan, math.nan, Verdict.FAIL, tolerances, failures=[str(exc)]
        )

    max_residual = max(result.max_abs_residual for result in results)
    gaps = [result.functional_gap for result in results]
    spread = max(gaps) - min(gaps)
    boundary_error = max(abs(result.functional_gap - result.boundary_gap) for result in results)
    failures = []
    if not max_residual <= tol_res:
        failures.append(f"Identity residual {max_residual:.3e} exceeds {tol_res:.1e}.")
    if not spread <= tol_gap:
        failures.append(f"The functional gap is not constant, spread {spread:.3e} exceeds {tol_gap:.1e}.")
    if not boundary_error <= tol_gap:
        failures.append(f"The functional gap differs from G(b)-G(a) by {boundary_error:.3e}.")
    for failure in failures:
        logger.warning(failure)
    logger.info("Verified the fundamental lemma with %d trials on %s.", trials, scale)
    return VerificationReport(
        max_abs_residual=max_residual,
        points_checked=len(points) * trials,
        functional_gap=math.fsum(gaps) / len(gaps),
        gap_constant_spread=spread,
        verdict=Verdict.FAIL if failures else Verdict.PASS,
        tolerances=tolerances,
        boundary_gap=results[0].boundary_gap,
        failures=failures,
    )


def transport_minimizer(pair: LeitmannPair, x_tilde_star: Trajectory, tol: float = ADMISSIBILITY_TOL) -> Trajectory:
    """
    Map a minimizer of the transformed problem to the original problem, x*(t) = z(t, x̃*(t)).

    Raises
    ------
    InconsistentTransformationError
        If the image is not admissible for the original problem.
    """
    x_star = x_tilde_star.map(pair.transform.z, vectorized=pair.transform.vectorized)
    report = check_admissible(pair.original, x_star, tol)
    if not report:
        raise InconsistentTransformationError(f"The transported trajectory is not admissible. {report}", report)
    return x_star


def shift_constants(a: float, b: float, alpha: float, beta: float) -> tuple[float, float]:
    """
    The solution of c·a + d = alpha, c·b + d = beta.

    Raises
    ------
    DegenerateIntervalError
        If a = b.
    """
    if a == b:
        raise DegenerateIntervalError(f"The system has no unique solution for a = b = {a}.")
    return (alpha - beta) / (a - b), (beta * a - b * alpha) / (a - b)


def _require_illustrative(problem: VariationalProblem) -> None:
    rng = np.random.default_rng(0)
    for t, y, v in rng.uniform(-3, 3, size=(8, 3)):
        expected = v**2 + y + t * v
        if not abs(problem.lagrangian(t, y, v) - expected) <= 1e-9 * max(1.0, abs(expected)):
            raise ValueError("The linear shift construction requires the Lagrangian (x^Δ)² + x^σ + t·x^Δ.")


def linear_shift_case(problem: VariationalProblem, fault: Optional[Fault] = None) -> LeitmannPair:
    """
    Build the pair for the problem with Lagrangian (x^Δ)² + x^σ + t·x^Δ. The transformation x = x̃ + c·t + d maps it
    to the problem of minimizing ∫ (x̃^Δ)² Δt with x̃(a) = x̃(b) = 0, whose minimizer is x̃ ≡ 0, with the gauge
    G(t, x̃) = 2c·x̃ + t·x̃ + c·t² + (c² + d)·t.

    Parameters
    ----------
    problem: VariationalProblem
        The problem. Its Lagrangian is sampled to make sure it belongs to the family.
    fault: Fault, optional
        Inject a fault. ``Fault.DROP_GAUGE_TERM`` drops the c·t² term of the gauge.

    Raises
    ------
    ValueError
        If the Lagrangian is not of the required form.
    """
    _require_illustrative(problem)
    c, d = shift_constants(problem.a, problem.b, problem.alpha, problem.beta)
    quadratic = 0.0 if fault is Fault.DROP_GAUGE_TERM else c
    transform = Transformation(
        z=lambda t, x_t: x_t + c * t + d,
        z_inv=lambda t, x: x - c * t - d,
        gauge=lambda t, x_t: 2 * c * x_t + t * x_t + quadratic * t**2 + (c**2 + d) * t,
        vectorized=True,
    )
    transformed = VariationalProblem(problem.ts, problem.a, problem.b, 0.0, 0.0, quadratic_energy())
    return LeitmannPair(problem, transformed, transform)


def identity_pair(problem: VariationalProblem) -> LeitmannPair:
    """The pair (L, L) connected by the identity transformation and G ≡ 0."""
    return LeitmannPair(problem, problem, Transformation.identity())
