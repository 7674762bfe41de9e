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
"""Custom errors raised by the time scale library."""

from __future__ import annotations

from typing import Any


class TimeScaleError(Exception):
    """The base class for all exceptions of this library"""


class MembershipError(TimeScaleError):
    """A point was queried that does not belong to the time scale."""

    def __init__(self, value: float, scale: Any = None):
        super().__init__(f"{value!r} is not a member of the time scale {scale}.")

        self.value = value


class DomainError(TimeScaleError):
    """An operation was called outside of its domain, e.g. a delta derivative at the maximum of a scale that is not
    in T^κ."""


class QuadratureError(TimeScaleError):
    """The composite Simpson refinement did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} Achieved estimate: {estimate!r}.")

        self.estimate = estimate


class DegenerateIntervalError(TimeScaleError):
    """The interval [a, b] is empty or a single point."""


class InconsistentTransformationError(TimeScaleError):
    """A transformation maps an admissible trajectory to a non-admissible one."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)

        self.report = report


class WrongOracleError(TimeScaleError):
    """The discretized objective is not a quadratic, use the generic oracle instead."""


class DegeneracyError(TimeScaleError):
    """The stationarity system of the quadratic oracle is singular or not positive definite."""


class NoInvariantSolutionError(TimeScaleError):
    """No member of the invariance family makes the zero control admissible."""

    def __init__(self, message: str, s_first: float, s_second: float):
        super().__init__(message)

        self.s_first = s_first
        self.s_second = s_second


class ConfigError(TimeScaleError):
    """Invalid command line or JSON configuration."""
