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
This is a library for the calculus of variations on time scales. It implements the delta calculus on finite unions
of points and intervals, verifies Leitmann's direct method numerically and certifies the minimizers it produces by an
independent discretized minimization.
"""

from ._version import __version__
from .control import (
    ControlPair,
    ControlProblem,
    ControlState,
    SParamFamily,
    check_invariance,
    cost,
    feasible,
    shipped_control_problem,
    simulate,
    solve_by_invariance,
)
from .delta_calculus import ScaleFunction, compose_sigma, delta_derivative, delta_integral, oriented_delta_integral
from .enums import ExitCode, Fault, OracleMethod, Verdict
from .flags import PointClass
from .leitmann import LeitmannPair, Transformation, linear_shift_case, transport_minimizer, verify_lemma
from .oracle import DiscretizedProblem, discretize, solve_generic, solve_quadratic
from .timescale import HStep, Integers, Interval, Point, QScale, TimeScale, UnionOf, parse_scale
from .variational import Lagrangian, Trajectory, VariationalProblem, evaluate_functional, illustrative_problem

__all__ = [
    "TimeScale",
    "Point",
    "Interval",
    "Integers",
    "HStep",
    "QScale",
    "UnionOf",
    "parse_scale",
    "PointClass",
    "ScaleFunction",
    "delta_derivative",
    "delta_integral",
    "oriented_delta_integral",
    "compose_sigma",
    "Lagrangian",
    "Trajectory",
    "VariationalProblem",
    "evaluate_functional",
    "illustrative_problem",
    "Transformation",
    "LeitmannPair",
    "verify_lemma",
    "transport_minimizer",
    "linear_shift_case",
    "ControlPair",
    "ControlProblem",
    "ControlState",
    "SParamFamily",
    "simulate",
    "cost",
    "feasible",
    "check_invariance",
    "solve_by_invariance",
    "shipped_control_problem",
    "DiscretizedProblem",
    "discretize",
    "solve_quadratic",
    "solve_generic",
    "Verdict",
    "OracleMethod",
    "Fault",
    "ExitCode",
]
