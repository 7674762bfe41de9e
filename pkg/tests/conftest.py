"""Shared time scales of the test suite"""

import pytest

from timescale_leitmann.timescale import Interval, Point, TimeScale
from timescale_leitmann.verification import bundled_scales

from .scales import integers


@pytest.fixture
def z_scale() -> TimeScale:
    """ℤ on 0..10"""
    return integers(0, 10)


@pytest.fixture
def unit_interval() -> TimeScale:
    """[0, 1]"""
    return TimeScale([Interval(0.0, 1.0)])


@pytest.fixture
def mixed_scale() -> TimeScale:
    """{0} ∪ [1, 2]"""
    return TimeScale([Point(0.0), Interval(1.0, 2.0)])


@pytest.fixture
def three_points() -> TimeScale:
    """{0, 1, 2}"""
    return integers(0, 2)


@pytest.fixture(params=list(bundled_scales()))
def bundled_scale(request) -> TimeScale:
    """Every time scale of the default bundle"""
    return bundled_scales()[request.param]


@pytest.fixture(params=[name for name, scale in bundled_scales().items() if scale.is_scattered])
def scattered_scale(request) -> TimeScale:
    """The purely scattered time scales of the default bundle"""
    return bundled_scales()[request.param]
