import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qkdlink import orbit
from qkdlink.constants import EARTH_RADIUS_M, GM_EARTH


def test_slant_range_at_zenith_equals_altitude():
    assert orbit.slant_range(500e3, 90.0) == pytest.approx(500e3, rel=1e-12)


def test_slant_range_law_of_cosines_consistency():
    # the returned range must satisfy the triangle (R, R+h, slant)
    h, elev = 700e3, 35.0
    s = orbit.slant_range(h, elev)
    r1, r2 = EARTH_RADIUS_M, EARTH_RADIUS_M + h
    # angle at the ground station between local vertical and the line of sight
    zenith = math.radians(90.0 - elev)
    r2_check = math.sqrt(r1**2 + s**2 - 2 * r1 * s * math.cos(math.pi - zenith))
    assert r2_check == pytest.approx(r2, rel=1e-12)


@given(st.floats(200e3, 3000e3), st.floats(5.0, 89.0), st.floats(1.0, 40.0))
def test_slant_range_monotone_decreasing_in_elevation(h, e1, de):
    assert orbit.slant_range(h, e1) > orbit.slant_range(h, min(e1 + de, 90.0))


def test_slew_rate_max_at_zenith():
    h = 500e3
    v_orb = math.sqrt(GM_EARTH / (EARTH_RADIUS_M + h))
    assert orbit.slew_rate(h, 90.0) == pytest.approx(v_orb / h, rel=1e-9)
    for elev in (20.0, 40.0, 60.0, 80.0):
        assert orbit.slew_rate(h, elev) < orbit.slew_rate(h, 90.0)


def test_pass_duration_frozen():
    # circular zenith pass, 500 km, 20 deg minimum elevation
    dur = orbit.pass_duration(orbit.OrbitConfig(500.0))
    assert dur == pytest.approx(295.6438, rel=1e-4)


def test_segments_weights_uniform_and_normalized():
    segs = orbit.segment_pass(orbit.OrbitConfig(500.0, segment_count=9))
    assert len(segs) == 9
    weights = [s.weight for s in segs]
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(weights, weights[0])


def test_segments_mirror_symmetric():
    segs = orbit.segment_pass(orbit.OrbitConfig(800.0, segment_count=7))
    for a, b in zip(segs, segs[::-1]):
        assert a.elevation_deg == pytest.approx(b.elevation_deg, rel=1e-9)
        assert a.slant_range_m == pytest.approx(b.slant_range_m, rel=1e-9)


def test_segment_elevations_peak_in_middle():
    segs = orbit.segment_pass(orbit.OrbitConfig(500.0, segment_count=9))
    elevs = [s.elevation_deg for s in segs]
    mid = len(elevs) // 2
    assert max(elevs) == elevs[mid]
    assert min(elevs) >= 20.0 - 1e-9


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        orbit.OrbitConfig(-1.0)
    with pytest.raises(ValueError):
        orbit.OrbitConfig(500.0, min_elevation_deg=95.0)
    with pytest.raises(ValueError):
        orbit.slant_range(500e3, -5.0)
