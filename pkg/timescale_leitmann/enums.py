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
"""Enums are used to represent verdicts, oracle methods, injected faults and exit codes."""

from __future__ import annotations

from enum import Enum


class Verdict(Enum):
    """The outcome of a verification."""

    PASS = "pass"
    FAIL = "fail"


class OracleMethod(Enum):
    """The minimization method used by the oracle."""

    QUADRATIC = "quadratic"
    GENERIC = "generic"


class Fault(Enum):
    """Faults that can be injected into the verification suite to make sure it does not pass vacuously."""

    DROP_GAUGE_TERM = "drop-gauge-term"


class ExitCode(Enum):
    """The exit codes of the command line interface."""

    SUCCESS = 0
    CONFIG_ERROR = 1
    VERIFICATION_FAILED = 2
