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
"""Flags are used to classify the points of a time scale."""

from __future__ import annotations

from enum import Flag


class PointClass(Flag):
    """The classification of a point t of a time scale by its jump operators."""

    NONE = 0b0
    RIGHT_SCATTERED = 1 << 0  # σ(t) > t
    RIGHT_DENSE = 1 << 1  # σ(t) = t
    LEFT_SCATTERED = 1 << 2  # ρ(t) < t
    LEFT_DENSE = 1 << 3  # ρ(t) = t
    MIN = 1 << 4
    MAX = 1 << 5
    ISOLATED = LEFT_SCATTERED | RIGHT_SCATTERED
    DENSE = LEFT_DENSE | RIGHT_DENSE
