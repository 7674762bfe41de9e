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
Verification suites over a bundle of time scales: the axioms of the jump operators, the fundamental theorem,
additivity and linearity of the delta integral, the fundamental lemma of the linear shift case, the agreement of the
transported minimizer with the oracle, dominance sampling and the invariance of the control problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .control import (
    ControlProblem,
    check_invariance,
    cost,
    default_invariance_tolerance,
    random_feasible_controls,
    shipped_control_problem,
    solve_by_invariance,
)
from .delta_calculus import ScaleFunction, delta_derivative, delta_integral, delta_product
from .enums import Fault, Verdict
from .errors import MembershipError, TimeScaleError
from .flags import PointClass
from .leitmann import linear_shift_case, transport_minimizer, verify_lemma
from .oracle import discretize, grid_values, solve_quadratic
from .timescale import HStep, Integers, Interval, Point, QScale, TimeScale
from .variational import (
    Trajectory,
    VariationalProblem,
    evaluate_functional,
    illustrative_problem,
    random_admissible,
    sample_points,
)

TOL_CALCULUS_SCATTERED = 1e-12
TOL_CALCULUS_DENSE = 1e-9
TOL_ORACLE = 1e-9
TOL_COST_SCATTERED = 1e-12
TOL_COST_DENSE = 1e-6
EXPECTED_MIN_COST = 1.0
S_GRID = (-1.0, -0.5, 0.5, 1.0)
AXIOM_SAMPLES = 16


@dataclass
class SuiteResult:
    """The outcome of one suite on one time scale."""

    name: str
    scale: str
    verdict: Verdict
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True if the verdict is pass."""
        return self.verdict is Verdict.PASS

    def to_json(self) -> dict[str, Any]:
        """The result as a JSON serializable dict."""
        return {"suite": self.name, "scale": self.scale, "verdict": self.verdict.value, "details": self.details}

    def __str__(self) -> str:
        return f"{self.verdict.value.upper():4} {self.name:20} {self.scale}"


def bundled_scales() -> dict[str, TimeScale]:
    """The default bundle: ℤ on 0..10, 0.25ℤ on [0, 2], [0, 1], {0} ∪ [1, 2] and 2^k for k = 0..6."""
    return {
        "integers": TimeScale(Integers(0, 10).components()),
        "hstep": TimeScale(HStep(0.0, 2.0, 0.25).components()),
        "interval": TimeScale([Interval(0.0, 1.0)]),
        "mixed": TimeScale([Point(0.0), Interval(1.0, 2.0)]),
        "qscale": TimeScale(QScale(2.0, 0, 6).components()),
    }


def calculus_tolerance(ts: TimeScale) -> float:
    """1e-12 on purely scattered time scales, 1e-9 if there are dense segments."""
    return TOL_CALCULUS_SCATTERED if ts.is_scattered else TOL_CALCULUS_DENSE


def _close(actual: float, expected: float, tol: float) -> bool:
    return abs(actual - expected) <= tol * max(1.0, abs(expected))


def _verdict(passed: bool) -> Verdict:
    return Verdict.PASS if passed else Verdict.FAIL


def operator_axioms(ts: TimeScale) -> SuiteResult:
    """
    σ(t) ≥ t and ρ(t) ≤ t are members, μ = σ - t ≥ 0, the classification agrees with the jump operators and
    f^σ = f + μ·f^Δ as well as the product rule (fg)^Δ = f^Δ g^σ + f g^Δ hold on T^κ.
    """
    f = ScaleFunction.from_polynomial(Polynomial([1.0, -1.0, 1.0]))
    g = ScaleFunction.from_polynomial(Polynomial([0.5, 2.0]))
    product = ScaleFunction.from_polynomial(Polynomial([1.0, -1.0, 1.0]) * Polynomial([0.5, 2.0]))
    violations: list[str] = []
    points = sample_points(ts, AXIOM_SAMPLES)
    for t in points:
        sigma, rho, mu = ts.sigma(t), ts.rho(t), ts.graininess(t)
        if not (sigma >= t and rho <= t and sigma in ts and rho in ts and mu >= 0):
            violations.append(f"Jump operators at {t}: σ={sigma}, ρ={rho}, μ={mu}")
        flags = ts.classify(t)
        if bool(flags & PointClass.RIGHT_SCATTERED) != (sigma > t) or bool(flags & PointClass.LEFT_SCATTERED) != (
            rho < t
        ):
            violations.append(f"Classification of {t}: {flags!r}")
        if ts.in_kappa(t):
            expected = f(t) + mu * delta_derivative(ts, f, t)
            if not _close(f(sigma), expected, calculus_tolerance(ts)):
                violations.append(f"f^σ({t}) = {f(sigma)!r} != f + μ f^Δ = {expected!r}")
            rule = delta_product(ts, f, g, t)
            if not _close(delta_derivative(ts, product, t), rule, calculus_tolerance(ts)):
                violations.append(f"(fg)^Δ({t}) != f^Δ g^σ + f g^Δ = {rule!r}")
    return SuiteResult(
        "operator_axioms", str(ts), _verdict(not violations), {"points": len(points), "violations": violations}
    )


def fundamental_theorem(ts: TimeScale) -> SuiteResult:
    """∫_a^b F^Δ Δt = F(b) - F(a) for a cubic F."""
    antiderivative = ScaleFunction.from_polynomial(Polynomial([1.0, -2.0, 0.5, 0.25]))
    derivative = ScaleFunction(lambda t: delta_derivative(ts, antiderivative, t))
    integral = delta_integral(ts, derivative, ts.min, ts.max)
    expected = antiderivative(ts.max) - antiderivative(ts.min)
    return SuiteResult(
        "fundamental_theorem",
        str(ts),
        _verdict(_close(integral, expected, calculus_tolerance(ts))),
        {"integral": integral, "expected": expected},
    )


def _midpoint(ts: TimeScale) -> float:
    points = sample_points(ts, AXIOM_SAMPLES)
    return points[len(points) // 2]


def additivity(ts: TimeScale) -> SuiteResult:
    """∫_a^c f + ∫_c^b f = ∫_a^b f for a member c in the middle of the time scale."""
    f = ScaleFunction(math.cos)
    c = _midpoint(ts)
    split = delta_integral(ts, f, ts.min, c) + delta_integral(ts, f, c, ts.max)
    whole = delta_integral(ts, f, ts.min, ts.max)
    return SuiteResult(
        "additivity",
        str(ts),
        _verdict(_close(split, whole, calculus_tolerance(ts))),
        {"c": c, "split": split, "whole": whole},
    )


def linearity(ts: TimeScale, factor: float = 3.0) -> SuiteResult:
    """∫ (2f - 3g) = 2∫f - 3∫g, and scaling the Lagrangian by `factor` scales the functional by `factor`."""
    f, g = ScaleFunction(math.cos), ScaleFunction(lambda t: t**2)
    combined = delta_integral(ts, ScaleFunction(lambda t: 2 * f(t) - 3 * g(t)), ts.min, ts.max)
    separate = 2 * delta_integral(ts, f, ts.min, ts.max) - 3 * delta_integral(ts, g, ts.min, ts.max)
    problem = illustrative_problem(ts, ts.min, ts.max, 0.0, 1.0)
    x = random_admissible(problem, 0)
    functional = evaluate_functional(problem, x)
    scaled = evaluate_functional(problem.with_lagrangian(problem.lagrangian.scaled(factor)), x)
    tol = calculus_tolerance(ts)
    return SuiteResult(
        "linearity",
        str(ts),
        _verdict(_close(combined, separate, tol) and _close(scaled, factor * functional, tol)),
        {"combined": combined, "separate": separate, "functional": functional, "scaled_functional": scaled},
    )


def lemma(  # pylint: disable=too-many-arguments
    ts: TimeScale,
    alpha: float,
    beta: float,
    trials: int,
    seed: int,
    tol_res: Optional[float] = None,
    tol_gap: float = 1e-8,
    fault: Optional[Fault] = None,
) -> SuiteResult:
    """The fundamental lemma for the linear shift case on [min, max]."""
    pair = linear_shift_case(illustrative_problem(ts, ts.min, ts.max, alpha, beta), fault)
    report = verify_lemma(pair, trials, seed, tol_res, tol_gap)
    return SuiteResult("lemma", str(ts), report.verdict, report.to_json())


def _leitmann_minimizer(ts: TimeScale, alpha: float, beta: float) -> tuple[VariationalProblem, Trajectory]:
    problem = illustrative_problem(ts, ts.min, ts.max, alpha, beta)
    pair = linear_shift_case(problem)
    x_star = transport_minimizer(pair, Trajectory.from_polynomial(problem.scale, Polynomial([0.0])))
    return problem, x_star


def oracle_agreement(ts: TimeScale, alpha: float, beta: float) -> SuiteResult:
    """The transported minimizer agrees with the quadratic oracle pointwise and in value within 1e-9."""
    problem, x_star = _leitmann_minimizer(ts, alpha, beta)
    dp = discretize(problem)
    result = solve_quadratic(dp)
    deviation = float(np.max(np.abs(grid_values(dp, x_star) - np.array(result.argmin))))
    transported = dp.objective(dp.sample(x_star))
    passed = deviation <= TOL_ORACLE and _close(result.value, transported, TOL_ORACLE)
    return SuiteResult(
        "oracle_agreement",
        str(ts),
        _verdict(passed),
        {"max_deviation": deviation, "oracle_value": result.value, "transported_value": transported},
    )


def dominance(ts: TimeScale, alpha: float, beta: float, trials: int, seed: int, magnitude: float = 1.0) -> SuiteResult:
    """Random admissible trajectories never beat the transported minimizer."""
    problem, x_star = _leitmann_minimizer(ts, alpha, beta)
    minimum = evaluate_functional(problem, x_star)
    tol = TOL_ORACLE * max(1.0, abs(minimum))
    violations = 0
    lowest = math.inf
    for trial_seed in np.random.SeedSequence(seed).generate_state(trials):
        value = evaluate_functional(problem, random_admissible(problem, int(trial_seed), magnitude))
        lowest = min(lowest, value)
        violations += value < minimum - tol
    return SuiteResult(
        "dominance",
        str(ts),
        _verdict(violations == 0),
        {"minimum": minimum, "lowest_sample": lowest, "samples": trials, "violations": violations},
    )


def control_invariance(ts: TimeScale, controls: int, seed: int) -> Optional[SuiteResult]:
    """
    Solve the control problem on [0, 1] ∩ T by invariance, check the invariance gap for every s of the grid along
    random controls meeting the end point conditions and check that random feasible controls never beat the
    minimum. Returns None if 0 or 1 is not a member of the time scale.
    """
    try:
        p: ControlProblem = shipped_control_problem(ts)
    except MembershipError:
        return None
    solution = solve_by_invariance(p)
    tol_cost = TOL_COST_SCATTERED if p.scale.is_scattered else TOL_COST_DENSE
    direct = cost(p, solution.minimizer)
    passed = _close(solution.min_cost, EXPECTED_MIN_COST, tol_cost) and _close(direct, EXPECTED_MIN_COST, tol_cost)
    tol = default_invariance_tolerance(p.scale)
    failed_gaps = 0
    beaten = 0
    for trial_seed in np.random.SeedSequence(seed).generate_state(controls):
        unboxed = random_feasible_controls(p, int(trial_seed), u2_magnitude=0.5, enforce_box=False)
        boxed = random_feasible_controls(p, int(trial_seed))
        failed_gaps += sum(not check_invariance(p, s, unboxed, tol).passed for s in S_GRID)
        beaten += sum(cost(p, u) < solution.min_cost - tol_cost for u in (unboxed, boxed))
    passed = passed and failed_gaps == 0 and beaten == 0
    return SuiteResult(
        "control_invariance",
        str(ts),
        _verdict(passed),
        {
            "s_star": solution.s_star,
            "min_cost": solution.min_cost,
            "direct_cost": direct,
            "failed_gaps": failed_gaps,
            "beaten": beaten,
            "controls": controls,
        },
    )


def _guarded(name: str, ts: TimeScale, suite: Callable[[], Optional[SuiteResult]]) -> Optional[SuiteResult]:
    try:
        return suite()
    except (TimeScaleError, ValueError) as exc:
        logging.getLogger(__name__).warning("Suite %s failed on %s: %s", name, ts, exc)
        return SuiteResult(name, str(ts), Verdict.FAIL, {"error": str(exc)})


def run_suites(  # pylint: disable=too-many-arguments
    scales: dict[str, TimeScale],
    alpha: float = 0.0,
    beta: float = 1.0,
    trials: int = 100,
    seed: int = 0,
    tol_res: Optional[float] = None,
    tol_gap: float = 1e-8,
    fault: Optional[Fault] = None,
    log_level: int = logging.WARNING,
) -> list[SuiteResult]:
    """
    Run every suite on every time scale.

    Parameters
    ----------
    scales: dict of str to TimeScale
        The time scales by name.
    alpha: float, default=0.0
        The boundary value at the minimum of each time scale.
    beta: float, default=1.0
        The boundary value at the maximum of each time scale.
    trials: int, default=100
        The number of random trajectories of the lemma and dominance suites. The control suite uses a tenth.
    seed: int, default=0
        The seed of all random suites.
    tol_res: float, optional
        The residual tolerance of the lemma suite.
    tol_gap: float, default=1e-8
        The gap tolerance of the lemma suite.
    fault: Fault, optional
        A fault injected into the lemma suite.
    log_level: int, default=logging.WARNING
        The level of logging output.

    Returns
    -------
    list of SuiteResult
        One result per suite and time scale. The control suite is skipped on time scales without 0 and 1.
    """
    logger = logging.getLogger(__name__)
    logger.setLevel(log_level)
    results: list[SuiteResult] = []
    for name, ts in scales.items():
        logger.info("Running the suites on %s: %s", name, ts)
        suites: dict[str, Callable[[], Optional[SuiteResult]]] = {
            "operator_axioms": lambda ts=ts: operator_axioms(ts),
            "fundamental_theorem": lambda ts=ts: fundamental_theorem(ts),
            "additivity": lambda ts=ts: additivity(ts),
            "linearity": lambda ts=ts: linearity(ts),
            "lemma": lambda ts=ts: lemma(ts, alpha, beta, trials, seed, tol_res, tol_gap, fault),
            "oracle_agreement": lambda ts=ts: oracle_agreement(ts, alpha, beta),
            "dominance": lambda ts=ts: dominance(ts, alpha, beta, trials, seed),
            "control_invariance": lambda ts=ts: control_invariance(ts, max(1, trials // 10), seed),
        }
        for suite_name, suite in suites.items():
            result = _guarded(suite_name, ts, suite)
            if result is None:
                logger.debug("Skipped %s on %s.", suite_name, ts)
                continue
            logger.debug("%s", result)
            results.append(result)
    return results
