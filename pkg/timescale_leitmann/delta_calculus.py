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
Delta derivative, σ-composition and delta integral of scalar functions on a time scale. On right-scattered points the
operations reduce to forward differences and weighted sums, on dense segments to classical calculus evaluated
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Optional

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, QuadratureError
from .timescale import Interval, TimeScale

# Step of the fourth order stencils on dense segments, larger than h = 1e-6: the round-off of the quotient grows like
# eps/h while the truncation error shrinks like h⁴.
H_NUM = 1e-3
TOL_QUAD = 1e-10
MAX_NODES = 2**16
INITIAL_PANELS = 32

DenseRule = Callable[[np.ndarray, float, float], Any]


@dataclass(frozen=True)
class ScaleFunction:
    """
    A real valued function on a time scale.

    `breaks` lists the points where the function may fail to be delta differentiable (corner points), and
    `derivative` optionally gives the exact derivative on dense segments. Without it, the derivative at right-dense
    points is computed numerically.

    `dense` and `dense_derivative` optionally evaluate the function and its derivative on an array of nodes inside
    one piece [lo, hi] of a dense segment, called as ``dense(nodes, lo, hi)``. The quadrature uses them instead of
    calling `rule` node by node.
    """

    rule: Callable[[float], float]
    breaks: tuple[float, ...] = ()
    derivative: Optional[Callable[[float], float]] = None
    dense: Optional[DenseRule] = None
    dense_derivative: Optional[DenseRule] = None

    def __call__(self, t: float) -> float:
        return float(self.rule(t))

    @classmethod
    def constant(cls, value: float) -> ScaleFunction:
        """The constant function."""
        return cls(
            lambda t: value,
            derivative=lambda t: 0.0,
            dense=lambda nodes, lo, hi: np.full(len(nodes), value, dtype=float),
            dense_derivative=lambda nodes, lo, hi: np.zeros(len(nodes)),
        )

    @classmethod
    def from_polynomial(cls, polynomial: np.polynomial.Polynomial) -> ScaleFunction:
        """A polynomial in t, with its exact derivative."""
        derivative = polynomial.deriv()
        return cls(
            polynomial,
            derivative=derivative,
            dense=lambda nodes, lo, hi: polynomial(nodes),
            dense_derivative=lambda nodes, lo, hi: derivative(nodes),
        )


def _as_samples(values: Any, nodes: np.ndarray) -> np.ndarray:
    """A writable float array of the shape of `nodes`, broadcasting constant results."""
    return np.array(np.broadcast_to(np.asarray(values, dtype=float), np.shape(nodes)), dtype=float)


def sample_dense(f: ScaleFunction, nodes: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """
    The values of `f` at `nodes`, all of them inside the piece [lo, hi] of a dense segment. Uses the vectorized rule
    of `f` if it has one.
    """
    if f.dense is not None:
        return _as_samples(f.dense(nodes, lo, hi), nodes)
    return np.array([f(t) for t in nodes], dtype=float)


def _stencil_dense(f: ScaleFunction, nodes: np.ndarray, lo: float, hi: float, h: float, eps: float) -> np.ndarray:
    """:func:`_stencil` on an array of nodes, choosing the same stencil per node."""
    central = (nodes - 2 * h >= lo) & (nodes + 2 * h <= hi)
    forward = ~central & (nodes + 4 * h <= hi)
    backward = ~central & ~forward & (nodes - 4 * h >= lo)
    result = np.empty(len(nodes))
    if central.any():
        t = nodes[central]
        samples = [sample_dense(f, t + k * h, lo, hi) for k in (-2, -1, 1, 2)]
        result[central] = (samples[0] - 8 * samples[1] + 8 * samples[2] - samples[3]) / (12 * h)
    for mask, step in ((forward, h), (backward, -h)):
        if mask.any():
            t = nodes[mask]
            samples = [sample_dense(f, t + k * step, lo, hi) for k in range(5)]
            result[mask] = (
                -25 * samples[0] + 48 * samples[1] - 36 * samples[2] + 16 * samples[3] - 3 * samples[4]
            ) / (12 * step)
    short = ~(central | forward | backward)
    for index in np.flatnonzero(short):
        result[index] = _stencil(f, float(nodes[index]), lo, hi, h, eps)
    return result


def dense_delta_derivative(
    f: ScaleFunction, nodes: np.ndarray, lo: float, hi: float, eps: float, h_num: float = H_NUM
) -> np.ndarray:
    """
    The derivative of `f` at `nodes` inside the piece [lo, hi] of a dense segment. Exact derivatives are used if
    available, the difference stencils of :func:`delta_derivative` otherwise.
    """
    if f.dense_derivative is not None:
        return _as_samples(f.dense_derivative(nodes, lo, hi), nodes)
    if f.derivative is not None:
        return np.array([float(f.derivative(t)) for t in nodes], dtype=float)
    return _stencil_dense(f, nodes, lo, hi, h_num, eps)


def compose_sigma(ts: TimeScale, f: ScaleFunction) -> ScaleFunction:
    """
    Returns f^σ = f∘σ.
    """
    return ScaleFunction(lambda t: f(ts.sigma(t)), breaks=f.breaks)


def _dense_piece(ts: TimeScale, breaks: tuple[float, ...], t: float) -> tuple[float, float]:
    """The sub-interval of the dense segment containing `t`, split at the breaks. A break belongs to the piece on its
    right, the maximum of the segment to the last piece."""
    component = ts.components[ts.locate(t)]
    assert isinstance(component, Interval)
    cuts = np.array([component.lo] + sorted(b for b in breaks if component.lo < b < component.hi) + [component.hi])
    index = min(int(np.searchsorted(cuts, t, side="right")) - 1, len(cuts) - 2)
    return float(cuts[index]), float(cuts[index + 1])


def _stencil(f: ScaleFunction, t: float, lo: float, hi: float, h: float, eps: float) -> float:
    """Fourth order difference quotient of f at t using nodes inside [lo, hi] only."""
    if t - 2 * h >= lo and t + 2 * h <= hi:
        return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
    forward = True
    if t + 4 * h > hi:
        if t - 4 * h >= lo:
            forward = False
        else:
            # Segment too short for the default step
            forward = hi - t >= t - lo
            h = max(hi - t, t - lo) / 4
            if h < eps:
                raise DomainError(f"The dense segment [{lo}, {hi}] is too short to differentiate at {t}.")
    if not forward:
        h = -h
    return (-25 * f(t) + 48 * f(t + h) - 36 * f(t + 2 * h) + 16 * f(t + 3 * h) - 3 * f(t + 4 * h)) / (12 * h)


def delta_derivative(ts: TimeScale, f: ScaleFunction, t: float, h_num: float = H_NUM) -> float:
    """
    The delta derivative f^Δ(t).

    Parameters
    ----------
    ts: TimeScale
        The time scale.
    f: ScaleFunction
        The function to differentiate.
    t: float
        A point of T^κ.
    h_num: float, default=1e-3
        The step of the difference stencil used at right-dense points if `f` has no exact derivative.

    Returns
    -------
    float
        (f(σ(t)) - f(t)) / μ(t) at right-scattered points, the derivative of f at right-dense points. At a break the
        right-sided derivative is returned.

    Raises
    ------
    MembershipError
        If `t` is not a member of the time scale.
    DomainError
        If `t` is not in T^κ.
    """
    t = ts.snap(t)
    if not ts.in_kappa(t):
        raise DomainError(f"{t} is not in T^κ of {ts}.")
    mu = ts.graininess(t)
    if mu > 0:
        return (f(ts.sigma(t)) - f(t)) / mu
    if f.derivative is not None:
        return float(f.derivative(t))
    lo, hi = _dense_piece(ts, f.breaks, t)
    return _stencil(f, t, lo, hi, h_num, ts.eps_member)


def delta_product(ts: TimeScale, f: ScaleFunction, g: ScaleFunction, t: float) -> float:
    """
    The product rule (fg)^Δ = f^Δ g^σ + f g^Δ evaluated at t ∈ T^κ.
    """
    return delta_derivative(ts, f, t) * g(ts.sigma(t)) + f(t) * delta_derivative(ts, g, t)


def _pieces(segment: Interval, breaks: tuple[float, ...]) -> Iterator[tuple[float, float]]:
    cuts = [segment.lo] + sorted(b for b in breaks if segment.lo < b < segment.hi) + [segment.hi]
    yield from zip(cuts[:-1], cuts[1:])


def _composite_simpson(
    f: ScaleFunction, lo: float, hi: float, left_limit_at_hi: bool, tol_quad: float, max_nodes: int
) -> float:
    """Composite Simpson rule on [lo, hi], doubling the node count until two estimates agree."""
    nodes = np.linspace(lo, hi, INITIAL_PANELS + 1)
    values = sample_dense(f, nodes, lo, hi)
    estimate: float | None = None
    while True:
        integrand = values.copy()
        if left_limit_at_hi:
            # f(hi) belongs to the jump to σ(hi), the segment needs the left-sided limit
            integrand[-1] = 3 * values[-2] - 3 * values[-3] + values[-4]
        refined = float(simpson(integrand, dx=(hi - lo) / (len(nodes) - 1)))
        if estimate is not None and abs(refined - estimate) <= tol_quad * max(1.0, abs(refined)):
            return refined
        if 2 * (len(nodes) - 1) > max_nodes:
            raise QuadratureError(
                f"Simpson refinement on [{lo}, {hi}] did not converge to {tol_quad} within {max_nodes} nodes.", refined
            )
        estimate = refined
        midpoints = 0.5 * (nodes[:-1] + nodes[1:])
        refined_nodes = np.empty(2 * len(nodes) - 1)
        refined_values = np.empty_like(refined_nodes)
        refined_nodes[0::2], refined_nodes[1::2] = nodes, midpoints
        refined_values[0::2], refined_values[1::2] = values, sample_dense(f, midpoints, lo, hi)
        nodes, values = refined_nodes, refined_values


def delta_integral(
    ts: TimeScale,
    f: ScaleFunction,
    c: float,
    d: float,
    tol_quad: float = TOL_QUAD,
    max_nodes: int = MAX_NODES,
) -> float:
    """
    The delta integral of f over [c, d]: the sum of μ(t)·f(t) over the right-scattered points of [c, d) plus the
    Riemann integral over every dense segment of [c, d], split at the breaks of f.

    Parameters
    ----------
    ts: TimeScale
        The time scale.
    f: ScaleFunction
        A piecewise rd-continuous integrand.
    c: float
        The lower bound, a member of the time scale.
    d: float
        The upper bound, a member of the time scale with c <= d.
    tol_quad: float, default=1e-10
        The tolerance of the Simpson refinement on dense segments.
    max_nodes: int, default=2**16
        The maximum number of panels per dense piece.

    Returns
    -------
    float
        The integral.

    Raises
    ------
    MembershipError
        If `c` or `d` is not a member of the time scale.
    DomainError
        If c > d. Use :func:`oriented_delta_integral` instead.
    QuadratureError
        If the quadrature does not converge.
    """
    c, d = ts.snap(c), ts.snap(d)
    if c > d:
        raise DomainError(f"Invalid integration bounds: {c} > {d}.")
    if c == d:
        return 0.0
    scale = ts.restrict(c, d)
    components = scale.components
    # Every component but the last ends in a right-scattered point jumping to the next component
    terms = [
        (following.lo - component.hi) * f(component.hi) for component, following in zip(components, components[1:])
    ]
    for index, segment in enumerate(components):
        if not isinstance(segment, Interval):
            continue
        jumps = index + 1 < len(components)
        for lo, hi in _pieces(segment, f.breaks):
            left_limit_at_hi = hi < segment.hi or jumps
            terms.append(_composite_simpson(f, lo, hi, left_limit_at_hi, tol_quad, max_nodes))
    return math.fsum(terms)


def oriented_delta_integral(ts: TimeScale, f: ScaleFunction, c: float, d: float, **kwargs) -> float:
    """
    The delta integral with orientation: the integral from c to d is the negative of the integral from d to c.
    """
    if ts.snap(c) > ts.snap(d):
        return -delta_integral(ts, f, d, c, **kwargs)
    return delta_integral(ts, f, c, d, **kwargs)


def kappa_samples(ts: TimeScale, dense_samples: int = 64) -> list[float]:
    """
    Sample points of T^κ: every scattered point of T^κ and `dense_samples` evenly spaced interior points per dense
    segment, in increasing order.
    """
    points = [t for t in ts.enumerate_scattered() if ts.in_kappa(t)]
    for segment in ts.dense_segments():
        points.extend(float(t) for t in np.linspace(segment.lo, segment.hi, dense_samples + 2)[1:-1])
    return sorted(points)
