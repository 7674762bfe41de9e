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
Bounded time scales described as a finite, sorted union of isolated points and closed intervals. The module provides
the forward and backward jump operators, the graininess, the classification of points and the T^κ truncation.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .errors import ConfigError, MembershipError
from .flags import PointClass

try:
    from typing import Self  # type: ignore # Python 3.11
except ImportError:
    from typing_extensions import Self

EPS_MEMBER = 1e-12


@dataclass(frozen=True)
class Point:
    """An isolated point of a time scale."""

    t: float

    @property
    def lo(self) -> float:
        """The left end of the component, i.e. the point itself."""
        return self.t

    @property
    def hi(self) -> float:
        """The right end of the component, i.e. the point itself."""
        return self.t


@dataclass(frozen=True)
class Interval:
    """A closed interval [lo, hi] with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"Invalid interval [{self.lo}, {self.hi}]. The lower bound must be less than the upper.")

    @property
    def length(self) -> float:
        """The length of the interval."""
        return self.hi - self.lo


Component = Union[Point, Interval]


def _merge(components: Iterable[Component], eps: float) -> tuple[Component, ...]:
    """Sort the components and merge everything that touches or overlaps."""
    ordered = sorted(components, key=lambda component: (component.lo, component.hi))
    merged: list[Component] = []
    for component in ordered:
        if not (math.isfinite(component.lo) and math.isfinite(component.hi)):
            raise ValueError(f"Only bounded time scales are supported, got {component}.")
        if merged and component.lo <= merged[-1].hi + eps:
            previous = merged[-1]
            hi = max(previous.hi, component.hi)
            merged[-1] = Point(previous.lo) if hi - previous.lo <= eps else Interval(previous.lo, hi)
        else:
            merged.append(component)
    return tuple(merged)


class TimeScale:
    """
    A nonempty, closed and bounded subset of the real numbers, stored as strictly increasing, pairwise disjoint
    components. Instances are immutable.
    """

    def __init__(self, components: Iterable[Component], eps_member: float = EPS_MEMBER):
        """
        Create a time scale from points and intervals. Touching or overlapping components are merged.

        Parameters
        ----------
        components: Iterable of Point or Interval
            The components of the set. The order does not matter.
        eps_member: float, default=1e-12
            The absolute tolerance used when testing membership.
        """
        self.__eps = eps_member
        self.__components = _merge(components, eps_member)
        if not self.__components:
            raise ValueError("A time scale must be nonempty.")
        self.__lows = np.array([component.lo for component in self.__components])

    @property
    def components(self) -> tuple[Component, ...]:
        """
        The sorted components of the time scale.
        """
        return self.__components

    @property
    def eps_member(self) -> float:
        """
        The membership tolerance.
        """
        return self.__eps

    @property
    def min(self) -> float:
        """inf T"""
        return self.__components[0].lo

    @property
    def max(self) -> float:
        """sup T"""
        return self.__components[-1].hi

    @property
    def is_scattered(self) -> bool:
        """True if the time scale consists of isolated points only."""
        return all(isinstance(component, Point) for component in self.__components)

    def __repr__(self) -> str:
        return f"TimeScale({list(self.__components)!r})"

    def __str__(self) -> str:
        parts = [
            f"{{{component.t:g}}}" if isinstance(component, Point) else f"[{component.lo:g}, {component.hi:g}]"
            for component in self.__components
        ]
        if len(parts) > 6:
            parts = parts[:3] + ["..."] + parts[-2:]
        return " ∪ ".join(parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeScale):
            return NotImplemented
        return self.__components == other.components

    def __hash__(self) -> int:
        return hash(self.__components)

    def __contains__(self, t: object) -> bool:
        try:
            self.locate(t)  # type: ignore[arg-type]
        except (MembershipError, TypeError):
            return False
        return True

    def locate(self, t: float) -> int:
        """
        Returns the index of the component containing `t`.

        Parameters
        ----------
        t: float
            The point to look up.

        Returns
        -------
        int
            The index into :attr:`components`.

        Raises
        ------
        MembershipError
            If `t` is not a member of the time scale.
        """
        index = int(np.searchsorted(self.__lows, t + self.__eps, side="right")) - 1
        if index < 0 or not t <= self.__components[index].hi + self.__eps:
            raise MembershipError(t, self)
        return index

    def snap(self, t: float) -> float:
        """
        Returns the canonical stored value of a member. Isolated points and interval ends absorb the floating point
        drift allowed by `eps_member`, interior points of intervals are returned unchanged.
        """
        component = self.__components[self.locate(t)]
        if isinstance(component, Point):
            return component.t
        if abs(t - component.lo) <= self.__eps:
            return component.lo
        if abs(t - component.hi) <= self.__eps:
            return component.hi
        return t

    def sigma(self, t: float) -> float:
        """
        The forward jump operator σ(t) = inf{s ∈ T : s > t}, with σ(sup T) = sup T.

        Raises
        ------
        MembershipError
            If `t` is not a member of the time scale.
        """
        index = self.locate(t)
        t = self.snap(t)
        component = self.__components[index]
        if isinstance(component, Interval) and t < component.hi:
            return t
        if index + 1 < len(self.__components):
            return self.__components[index + 1].lo
        return t

    def rho(self, t: float) -> float:
        """
        The backward jump operator ρ(t) = sup{s ∈ T : s < t}, with ρ(inf T) = inf T.

        Raises
        ------
        MembershipError
            If `t` is not a member of the time scale.
        """
        index = self.locate(t)
        t = self.snap(t)
        component = self.__components[index]
        if isinstance(component, Interval) and t > component.lo:
            return t
        if index > 0:
            return self.__components[index - 1].hi
        return t

    def graininess(self, t: float) -> float:
        """
        The graininess μ(t) = σ(t) - t.

        Raises
        ------
        MembershipError
            If `t` is not a member of the time scale.
        """
        return self.sigma(t) - self.snap(t)

    def classify(self, t: float) -> PointClass:
        """
        Classify `t` by its jump operators.

        Returns
        -------
        PointClass
            The flags describing the point. A point is isolated if both scattered flags are set and dense if both
            dense flags are set.
        """
        t = self.snap(t)
        flags = PointClass.RIGHT_SCATTERED if self.sigma(t) > t else PointClass.RIGHT_DENSE
        flags |= PointClass.LEFT_SCATTERED if self.rho(t) < t else PointClass.LEFT_DENSE
        if t == self.min:
            flags |= PointClass.MIN
        if t == self.max:
            flags |= PointClass.MAX
        return flags

    def kappa(self) -> TimeScale:
        """
        Returns T^κ. The maximum is removed if it is left-scattered, otherwise the time scale is returned unchanged.
        """
        if len(self.__components) > 1 and isinstance(self.__components[-1], Point):
            return TimeScale(self.__components[:-1], self.__eps)
        return self

    def in_kappa(self, t: float) -> bool:
        """True if `t` is a member of T^κ."""
        if t not in self:
            return False
        return not (
            len(self.__components) > 1 and isinstance(self.__components[-1], Point) and self.snap(t) == self.max
        )

    def enumerate_scattered(self) -> list[float]:
        """
        Returns the points that are not inside a dense segment: every isolated point (including a scattered maximum)
        and every right end of an interval that is followed by a gap. Together with :meth:`dense_segments` this
        partitions the integration work over [min, max].
        """
        scattered: list[float] = []
        for index, component in enumerate(self.__components):
            if isinstance(component, Point):
                scattered.append(component.t)
            elif index + 1 < len(self.__components):
                scattered.append(component.hi)
        return scattered

    def dense_segments(self) -> list[Interval]:
        """
        Returns the intervals of the time scale in increasing order.
        """
        return [component for component in self.__components if isinstance(component, Interval)]

    def restrict(self, a: float, b: float) -> TimeScale:
        """
        Returns the time scale [a, b] ∩ T.

        Parameters
        ----------
        a: float
            The lower bound, a member of the time scale.
        b: float
            The upper bound, a member of the time scale with a <= b.

        Raises
        ------
        MembershipError
            If `a` or `b` is not a member of the time scale.
        """
        a, b = self.snap(a), self.snap(b)
        if a > b:
            raise ValueError(f"Invalid bounds: {a} > {b}.")
        if a == self.min and b == self.max:
            return self
        restricted: list[Component] = []
        for component in self.__components:
            if component.hi < a or component.lo > b:
                continue
            if isinstance(component, Point):
                restricted.append(component)
                continue
            lo, hi = max(component.lo, a), min(component.hi, b)
            restricted.append(Point(lo) if lo == hi else Interval(lo, hi))
        return TimeScale(restricted, self.__eps)

    def to_json(self) -> dict[str, Any]:
        """
        Returns the JSON description of the time scale in component form.
        """
        return {
            "components": [
                {"point": component.t} if isinstance(component, Point) else {"interval": [component.lo, component.hi]}
                for component in self.__components
            ]
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], eps_member: float = EPS_MEMBER) -> Self:
        """
        Create a time scale from its JSON description. Either a list of components
        (``{"components": [{"point": 0.0}, {"interval": [1.0, 2.0]}]}``) or a generator
        (``{"generator": {"hstep": {"a": 0, "b": 1, "h": 0.1}}}``) is accepted.

        Raises
        ------
        ConfigError
            If the description is malformed.
        """
        if not isinstance(data, dict) or len(data) != 1:
            raise ConfigError(f"A time scale needs exactly one of 'components' or 'generator', got: {data!r}")
        if "components" in data:
            return cls(_components_from_json(data["components"]), eps_member)
        if "generator" in data:
            return cls(generator_from_json(data["generator"]).components(), eps_member)
        raise ConfigError(f"Unknown time scale description: {data!r}")


def _components_from_json(items: Sequence[Any]) -> list[Component]:
    components: list[Component] = []
    try:
        for item in items:
            if set(item) == {"point"}:
                components.append(Point(float(item["point"])))
            elif set(item) == {"interval"}:
                lo, hi = item["interval"]
                components.append(Interval(float(lo), float(hi)))
            else:
                raise ConfigError(f"Unknown component: {item!r}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid components: {items!r}. {exc}") from None
    if not components:
        raise ConfigError("A time scale must be nonempty.")
    return components


@dataclass(frozen=True)
class Integers:
    """The integers a, a+1, ..., b."""

    a: int
    b: int

    def components(self) -> list[Component]:
        """Materialize the points of the generator."""
        if self.b < self.a:
            raise ValueError(f"Invalid range {self.a}..{self.b}.")
        return [Point(float(k)) for k in range(self.a, self.b + 1)]


@dataclass(frozen=True)
class HStep:
    """The grid a, a+h, ..., b of hℤ shifted to a. The step h must divide b - a."""

    a: float
    b: float
    h: float

    def components(self) -> list[Component]:
        """Materialize the points of the generator."""
        if self.h <= 0 or self.b < self.a:
            raise ValueError(f"Invalid grid {self.a}..{self.b} with step {self.h}.")
        steps = round((self.b - self.a) / self.h)
        if abs(self.a + steps * self.h - self.b) > 1e-9 * max(1.0, abs(self.b)):
            raise ValueError(f"The step {self.h} does not divide the range {self.a}..{self.b}.")
        grid = self.a + self.h * np.arange(steps + 1)
        grid[-1] = self.b
        return [Point(float(t)) for t in grid]


@dataclass(frozen=True)
class QScale:
    """The truncated quantum scale q^k_min, ..., q^k_max with q > 1."""

    q: float
    k_min: int
    k_max: int

    def components(self) -> list[Component]:
        """Materialize the points of the generator."""
        if self.q <= 1 or self.k_max < self.k_min:
            raise ValueError(f"Invalid quantum scale q={self.q}, k={self.k_min}..{self.k_max}.")
        return [Point(float(self.q**k)) for k in range(self.k_min, self.k_max + 1)]


@dataclass(frozen=True)
class UnionOf:
    """An explicit union of components."""

    parts: tuple[Component, ...]

    def components(self) -> list[Component]:
        """Return the components, they are merged by the time scale."""
        return list(self.parts)


ScaleGenerator = Union[Integers, HStep, QScale, UnionOf]


def generator_from_json(data: dict[str, Any]) -> ScaleGenerator:
    """
    Create a scale generator from its JSON description, e.g. ``{"hstep": {"a": 0, "b": 1, "h": 0.1}}``.

    Raises
    ------
    ConfigError
        If the description is malformed.
    """
    if not isinstance(data, dict) or len(data) != 1:
        raise ConfigError(f"A generator needs exactly one kind, got: {data!r}")
    ((kind, params),) = data.items()
    try:
        if kind == "integers":
            return Integers(**{key: int(value) for key, value in params.items()})
        if kind == "hstep":
            return HStep(**{key: float(value) for key, value in params.items()})
        if kind == "qscale":
            exponents = {key: int(value) for key, value in params.items() if key != "q"}
            return QScale(float(params["q"]), **exponents)
        if kind == "union":
            return UnionOf(tuple(_components_from_json(params)))
    except (TypeError, KeyError, AttributeError, ValueError) as exc:
        raise ConfigError(f"Invalid parameters for generator '{kind}': {params!r}. {exc}") from None
    raise ConfigError(f"Unknown generator: {kind}")


_NUMBER = r"[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_INTEGER = r"[-+]?\d+"
_SHORTHANDS = {
    "integers": re.compile(rf"integers:(?P<a>{_INTEGER})\.\.(?P<b>{_INTEGER})"),
    "hstep": re.compile(rf"hstep:(?P<a>{_NUMBER})\.\.(?P<b>{_NUMBER}):(?P<h>{_NUMBER})"),
    "qscale": re.compile(rf"qscale:(?P<q>{_NUMBER}):(?P<k_min>{_INTEGER})\.\.(?P<k_max>{_INTEGER})"),
    "interval": re.compile(rf"interval:(?P<lo>{_NUMBER})\.\.(?P<hi>{_NUMBER})"),
}


def parse_scale(text: str, eps_member: float = EPS_MEMBER) -> TimeScale:
    """
    Parse a time scale from the command line shorthand: ``integers:a..b``, ``hstep:a..b:h``,
    ``qscale:q:kmin..kmax``, ``interval:a..b``, ``file:<path>`` to a JSON file, or inline JSON.

    Raises
    ------
    ConfigError
        If the description cannot be parsed or describes an invalid time scale.
    """
    text = text.strip()
    try:
        if text.startswith("{"):
            return TimeScale.from_json(json.loads(text), eps_member)
        if text.startswith("file:"):
            with Path(text[len("file:") :]).open(encoding="utf-8") as file:
                return TimeScale.from_json(json.load(file), eps_member)
        kind = text.split(":", 1)[0]
        match = _SHORTHANDS[kind].fullmatch(text) if kind in _SHORTHANDS else None
        if match is None:
            raise ConfigError(f"Invalid time scale: '{text}'.")
        params = match.groupdict()
        if kind == "integers":
            return TimeScale(Integers(int(params["a"]), int(params["b"])).components(), eps_member)
        if kind == "hstep":
            generator = HStep(float(params["a"]), float(params["b"]), float(params["h"]))
            return TimeScale(generator.components(), eps_member)
        if kind == "qscale":
            generator_q = QScale(float(params["q"]), int(params["k_min"]), int(params["k_max"]))
            return TimeScale(generator_q.components(), eps_member)
        return TimeScale([Interval(float(params["lo"]), float(params["hi"]))], eps_member)
    except (OSError, ValueError) as exc:  # json.JSONDecodeError is a ValueError
        raise ConfigError(f"Invalid time scale '{text}': {exc}") from None
