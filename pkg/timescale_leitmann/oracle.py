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
Independent minimization of the discretized functional. On a purely scattered time scale the discretized objective
is the functional itself, so the oracle certifies global minima by a direct computation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, solveh_banded
from scipy.optimize import minimize_scalar

from .delta_calculus import ScaleFunction
from .enums import OracleMethod
from .errors import DegeneracyError, WrongOracleError
from .timescale import Point
from .variational import Lagrangian, Trajectory, VariationalProblem

DENSE_STEPS = 64
QUADRATIC_SAMPLES = 4
QUADRATIC_TOL = 1e-10
CONVERGENCE_TOL = 1e-10
GOLDEN_TOL = 1e-10
GOLDEN_MAXITER = 200
MAX_SWEEPS = 2000


@dataclass(frozen=True)
class DiscretizedProblem:
    """
    The functional on a grid t_0 = a < ... < t_N = b,

        F(x) = Σ_k μ_k L(t_k, x_{k+1}, (x_{k+1} - x_k) / μ_k),    μ_k = t_{k+1} - t_k,

    with x_0 = alpha and x_N = beta fixed and x_1, ..., x_{N-1} free. `exact` is True if the grid is the original
    purely scattered time scale, in which case F is the functional of the problem.
    """

    grid: tuple[float, ...]
    alpha: float
    beta: float
    lagrangian: Lagrangian
    exact: bool = True

    def __post_init__(self) -> None:
        if len(self.grid) < 2:
            raise ValueError(f"The grid needs at least two points, got {len(self.grid)}.")
        if any(not lo < hi for lo, hi in zip(self.grid[:-1], self.grid[1:])):
            raise ValueError("The grid must be strictly increasing.")

    @property
    def n_free(self) -> int:
        """The number of free variables N - 1."""
        return len(self.grid) - 2

    @cached_property
    def mu(self) -> tuple[float, ...]:
        """The step sizes μ_k."""
        return tuple(hi - lo for lo, hi in zip(self.grid[:-1], self.grid[1:]))

    def full(self, free: ArrayLike) -> np.ndarray:
        """The values on the whole grid given the free variables."""
        free = np.asarray(free, dtype=float)
        if free.shape != (self.n_free,):
            raise ValueError(f"Expected {self.n_free} free variables, got an array of shape {free.shape}.")
        return np.concatenate(([self.alpha], free, [self.beta]))

    def term(self, k: int, x_k: float, x_next: float) -> float:
        """The k-th summand μ_k L(t_k, x_{k+1}, (x_{k+1} - x_k) / μ_k)."""
        mu = self.mu[k]
        return mu * self.lagrangian(self.grid[k], x_next, (x_next - x_k) / mu)

    def objective(self, free: ArrayLike) -> float:
        """F evaluated at the free variables."""
        values = self.full(free)
        return math.fsum(self.term(k, values[k], values[k + 1]) for k in range(len(self.grid) - 1))

    def sample(self, x: Union[Trajectory, ScaleFunction, Callable[[float], float]]) -> np.ndarray:
        """The free variables of a trajectory, i.e. its values at the interior grid points."""
        return np.array([x(t) for t in self.grid[1:-1]], dtype=float)

    def linear_start(self) -> np.ndarray:
        """The free variables of the straight line through (t_0, alpha) and (t_N, beta)."""
        a, b = self.grid[0], self.grid[-1]
        return np.array([self.alpha + (self.beta - self.alpha) * (t - a) / (b - a) for t in self.grid[1:-1]])

    def local(self, values: np.ndarray, j: int, y: float) -> float:
        """The two summands depending on the grid value x_j, evaluated with x_j = y."""
        return self.term(j - 1, values[j - 1], y) + self.term(j, y, values[j + 1])


@dataclass
class OracleResult:
    """
    The result of an oracle run. `argmin` holds the values on the whole grid including both fixed end points.
    """

    method: OracleMethod
    value: float
    argmin: list[float]
    converged: bool
    grid: list[float]

    def to_json(self) -> dict[str, Any]:
        """The result as a JSON serializable dict."""
        return {
            "method": self.method.value,
            "value": self.value,
            "argmin": list(self.argmin),
            "converged": self.converged,
        }

    def __str__(self) -> str:
        return (
            f"Method   : {self.method.value}\n"
            f"Value    : {self.value:.15g}\n"
            f"Grid size: {len(self.grid)}\n"
            f"Converged: {self.converged}"
        )


def discretize(p: VariationalProblem, refine: int = 0) -> DiscretizedProblem:
    """
    Replace every dense segment of [a, b] ∩ T by a uniform grid of 64·2^refine steps. Purely scattered time scales
    are passed through unchanged.

    Parameters
    ----------
    p: VariationalProblem
        The problem to discretize.
    refine: int, default=0
        The refinement level of the dense segments.

    Returns
    -------
    DiscretizedProblem
        The discretized problem on a grid covering [a, b].
    """
    if refine < 0:
        raise ValueError(f"The refinement level must be nonnegative, got {refine}.")
    steps = DENSE_STEPS * 2**refine
    grid: list[float] = []
    for component in p.scale.components:
        if isinstance(component, Point):
            grid.append(component.t)
        else:
            grid.extend(float(t) for t in np.linspace(component.lo, component.hi, steps + 1))
    return DiscretizedProblem(tuple(grid), p.alpha, p.beta, p.lagrangian, exact=p.scale.is_scattered)


def _second_differences(dp: DiscretizedProblem, base: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradient, Hessian diagonal and Hessian off-diagonal of F at `base` from central differences with unit steps.
    These are exact up to rounding if F is a quadratic.
    """
    values = dp.full(base)
    n = dp.n_free
    gradient, diagonal, off_diagonal = np.empty(n), np.empty(n), np.empty(max(n - 1, 0))
    for i in range(n):
        j = i + 1
        up, centre, down = (dp.local(values, j, values[j] + step) for step in (1.0, 0.0, -1.0))
        gradient[i] = (up - down) / 2
        diagonal[i] = up - 2 * centre + down
    for i in range(n - 1):
        j = i + 1
        x_j, x_next = values[j], values[j + 1]
        off_diagonal[i] = (
            dp.term(j, x_j + 1, x_next + 1)
            - dp.term(j, x_j + 1, x_next - 1)
            - dp.term(j, x_j - 1, x_next + 1)
            + dp.term(j, x_j - 1, x_next - 1)
        ) / 4
    return gradient, diagonal, off_diagonal


def _quadratic_model(
    value: float, gradient: np.ndarray, diagonal: np.ndarray, off_diagonal: np.ndarray, step: np.ndarray
) -> float:
    curvature = float(np.dot(diagonal, step**2) + 2 * np.dot(off_diagonal, step[:-1] * step[1:]))
    return value + float(np.dot(gradient, step)) + curvature / 2


def _check_quadratic(
    dp: DiscretizedProblem,
    base: np.ndarray,
    derivatives: tuple[np.ndarray, np.ndarray, np.ndarray],
    rng: np.random.Generator,
) -> None:
    """Compare F with its quadratic model along random directions and the Hessian at shifted base points."""
    value = dp.objective(base)
    for _ in range(QUADRATIC_SAMPLES):
        step = rng.standard_normal(dp.n_free)
        actual = dp.objective(base + step)
        expected = _quadratic_model(value, *derivatives, step)
        if not abs(actual - expected) <= QUADRATIC_TOL * max(1.0, abs(actual)):
            raise WrongOracleError(
                f"The objective is not a quadratic: F = {actual!r} differs from its quadratic model {expected!r}."
                " Use the generic oracle."
            )
        _, diagonal, off_diagonal = _second_differences(dp, base + step)
        scale = max(1.0, abs(value), float(np.max(np.abs(derivatives[1]))))
        if not (
            np.allclose(diagonal, derivatives[1], rtol=0, atol=QUADRATIC_TOL * scale)
            and np.allclose(off_diagonal, derivatives[2], rtol=0, atol=QUADRATIC_TOL * scale)
        ):
            raise WrongOracleError("The Hessian of the objective is not constant. Use the generic oracle.")


def solve_quadratic(dp: DiscretizedProblem, seed: int = 0) -> OracleResult:
    """
    Minimize a convex quadratic objective exactly. The gradient and the tridiagonal Hessian are read off by second
    differences at the linear interpolant, the objective is checked to be a quadratic and the stationarity system is
    solved by a banded Cholesky factorization.

    Parameters
    ----------
    dp: DiscretizedProblem
        The discretized problem.
    seed: int, default=0
        The seed of the random test directions.

    Returns
    -------
    OracleResult
        The minimizer and the minimum, always converged.

    Raises
    ------
    WrongOracleError
        If the objective is not a quadratic.
    DegeneracyError
        If the Hessian is singular or not positive definite.
    """
    base = dp.linear_start()
    if dp.n_free == 0:
        return OracleResult(OracleMethod.QUADRATIC, dp.objective(base), dp.full(base).tolist(), True, list(dp.grid))
    derivatives = _second_differences(dp, base)
    _check_quadratic(dp, base, derivatives, np.random.default_rng(seed))
    gradient, diagonal, off_diagonal = derivatives
    if dp.n_free == 1:
        # solveh_banded rejects 1 x 1 systems
        if not diagonal[0] > 0:
            raise DegeneracyError(f"The stationarity equation is singular or not convex, curvature {diagonal[0]!r}.")
        step = -gradient / diagonal
    else:
        banded = np.zeros((2, dp.n_free))
        banded[0, 1:] = off_diagonal
        banded[1, :] = diagonal
        try:
            step = solveh_banded(banded, -gradient)
        except LinAlgError as exc:
            raise DegeneracyError(f"The stationarity system is singular or not positive definite: {exc}") from exc
    argmin = base + step
    logging.getLogger(__name__).debug("Solved the quadratic oracle with %d free variables.", dp.n_free)
    return OracleResult(OracleMethod.QUADRATIC, dp.objective(argmin), dp.full(argmin).tolist(), True, list(dp.grid))


def _line_search(dp: DiscretizedProblem, values: np.ndarray, j: int) -> None:
    """Minimize F in the coordinate x_j by a golden-section search, update `values` in place if it improves."""

    def local(y: float) -> float:
        return dp.local(values, j, y)

    current = values[j]
    try:
        result = minimize_scalar(
            local,
            bracket=(current - 1.0, current + 1.0),
            method="golden",
            tol=GOLDEN_TOL,
            options={"maxiter": GOLDEN_MAXITER},
        )
    except RuntimeError:
        # No bracket: the objective is flat or unbounded along the coordinate
        return
    if math.isfinite(result.fun) and result.fun < local(current):
        values[j] = float(result.x)


def _coordinate_descent(dp: DiscretizedProblem, start: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, float, bool]:
    values = dp.full(start)
    objective = dp.objective(values[1:-1])
    for _ in range(max_sweeps):
        for j in range(1, len(values) - 1):
            _line_search(dp, values, j)
        improved = dp.objective(values[1:-1])
        improvement, objective = objective - improved, improved
        if improvement < CONVERGENCE_TOL * max(1.0, abs(objective)):
            return values, objective, True
    return values, objective, False


def solve_generic(
    dp: DiscretizedProblem,
    restarts: int = 4,
    seed: int = 0,
    spread: float = 1.0,
    max_sweeps: int = MAX_SWEEPS,
    log_level: int = logging.WARNING,
) -> OracleResult:
    """
    Minimize the objective without derivatives: coordinate descent with a golden-section line search per variable,
    started from seeded random admissible points.

    Parameters
    ----------
    dp: DiscretizedProblem
        The discretized problem.
    restarts: int, default=4
        The number of random starting points.
    seed: int, default=0
        The seed of the starting points.
    spread: float, default=1.0
        The starting points are the linear interpolant plus uniform noise in [-spread, spread].
    max_sweeps: int, default=2000
        The maximum number of sweeps over all coordinates per start.
    log_level: int, default=logging.WARNING
        The level of logging output.

    Returns
    -------
    OracleResult
        The best point found. `converged` is True if the last sweep of that run improved the objective by less than
        1e-10 relative.
    """
    if restarts < 1:
        raise ValueError(f"At least one restart is required, got {restarts}.")
    logger = logging.getLogger(__name__)
    logger.setLevel(log_level)
    rng = np.random.default_rng(seed)
    base = dp.linear_start()
    best: tuple[np.ndarray, float, bool] | None = None
    for restart in range(restarts):
        start = base + spread * rng.uniform(-1, 1, size=dp.n_free)
        values, objective, converged = _coordinate_descent(dp, start, max_sweeps)
        logger.debug("Restart %d: value %.15g, converged: %s.", restart, objective, converged)
        if best is None or objective < best[1]:
            best = (values, objective, converged)
    assert best is not None
    values, objective, converged = best
    if not converged:
        logger.warning("Coordinate descent did not converge within %d sweeps.", max_sweeps)
    return OracleResult(OracleMethod.GENERIC, objective, values.tolist(), converged, list(dp.grid))


def grid_values(dp: DiscretizedProblem, x: Union[Trajectory, ScaleFunction]) -> np.ndarray:
    """The values of a trajectory on the whole grid of `dp`."""
    return np.array([x(t) for t in dp.grid], dtype=float)
