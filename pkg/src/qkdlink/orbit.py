"""Circular zenith-pass orbit geometry.

A satellite on a circular orbit crosses the ground-station zenith.  The pass
(above a minimum elevation) is sliced into fixed-distance segments, uniform in
time, so that segment weights are dwell-time fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import EARTH_RADIUS_M, GM_EARTH


@dataclass(frozen=True)
class OrbitConfig:
    altitude_km: float
    min_elevation_deg: float = 20.0
    earth_radius_km: float = EARTH_RADIUS_M / 1e3
    segment_count: int = 64

    def __post_init__(self):
        if self.altitude_km <= 0:
            raise ValueError(f"altitude must be positive, got {self.altitude_km}")
        if not 0 < self.min_elevation_deg < 90:
            raise ValueError(
                f"min_elevation must be in (0, 90) deg, got {self.min_elevation_deg}"
            )
        if self.segment_count < 1:
            raise ValueError("segment_count must be >= 1")


@dataclass(frozen=True)
class PassSegment:
    elevation_deg: float
    slant_range_m: float
    slew_rate_rad_s: float
    duration_s: float
    weight: float

    @property
    def zenith_angle_deg(self) -> float:
        return 90.0 - self.elevation_deg


def slant_range(altitude_m: float, elevation_deg: float,
                earth_radius_m: float = EARTH_RADIUS_M) -> float:
    """Line-of-sight distance from the ground station to the satellite.

    Spherical-Earth geometry; monotonically decreasing in elevation, equal to
    the altitude at zenith.
    """
    if elevation_deg <= 0:
        raise ValueError(f"elevation must be positive, got {elevation_deg}")
    if altitude_m <= 0:
        raise ValueError(f"altitude must be positive, got {altitude_m}")
    eps = math.radians(elevation_deg)
    r_orb = earth_radius_m + altitude_m
    return math.sqrt(r_orb**2 - (earth_radius_m * math.cos(eps)) ** 2) \
        - earth_radius_m * math.sin(eps)


def orbital_angular_velocity(altitude_m: float) -> float:
    """Keplerian angular velocity (rad/s) of a circular orbit."""
    return math.sqrt(GM_EARTH / (EARTH_RADIUS_M + altitude_m) ** 3)


def slew_rate(altitude_m: float, elevation_deg: float) -> float:
    """Apparent angular speed (rad/s) of the satellite seen from the station.

    Maximal at zenith, where it reduces to v_orb / altitude.
    """
    omega = orbital_angular_velocity(altitude_m)
    r_orb = EARTH_RADIUS_M + altitude_m
    srange = slant_range(altitude_m, elevation_deg)
    # central angle between station and sub-satellite point
    cos_alpha = (EARTH_RADIUS_M + srange * math.sin(math.radians(elevation_deg))) / r_orb
    cos_alpha = min(1.0, cos_alpha)
    return omega * r_orb * (r_orb - EARTH_RADIUS_M * cos_alpha) / srange**2


def _elevation_at_central_angle(alpha: float, altitude_m: float) -> float:
    """Elevation (deg) of the satellite at central angle alpha from zenith."""
    r_orb = EARTH_RADIUS_M + altitude_m
    x = r_orb * math.sin(alpha)
    y = r_orb * math.cos(alpha) - EARTH_RADIUS_M
    return math.degrees(math.atan2(y, x))


def _central_angle_at_elevation(elevation_deg: float, altitude_m: float) -> float:
    srange = slant_range(altitude_m, elevation_deg)
    r_orb = EARTH_RADIUS_M + altitude_m
    cos_alpha = (EARTH_RADIUS_M + srange * math.sin(math.radians(elevation_deg))) / r_orb
    return math.acos(min(1.0, cos_alpha))


def pass_duration(cfg: OrbitConfig) -> float:
    """Total time (s) the satellite spends above the minimum elevation."""
    altitude_m = cfg.altitude_km * 1e3
    alpha_max = _central_angle_at_elevation(cfg.min_elevation_deg, altitude_m)
    return 2.0 * alpha_max / orbital_angular_velocity(altitude_m)


def segment_pass(cfg: OrbitConfig) -> list[PassSegment]:
    """Slice the pass into segments uniform in time.

    Each segment is evaluated at its mid-time elevation; with a uniform time
    grid all weights are equal and sum to one.  The pass is symmetric about
    zenith, so only the rise half is computed and mirrored.
    """
    altitude_m = cfg.altitude_km * 1e3
    omega = orbital_angular_velocity(altitude_m)
    alpha_max = _central_angle_at_elevation(cfg.min_elevation_deg, altitude_m)
    total_time = 2.0 * alpha_max / omega
    n = cfg.segment_count
    dt = total_time / n

    segments = []
    half = (n + 1) // 2
    for i in range(half):
        t_mid = (i + 0.5) * dt
        alpha = alpha_max - omega * t_mid  # rising half: alpha decreases
        elev = _elevation_at_central_angle(abs(alpha), altitude_m)
        segments.append(PassSegment(
            elevation_deg=elev,
            slant_range_m=slant_range(altitude_m, elev),
            slew_rate_rad_s=slew_rate(altitude_m, elev),
            duration_s=dt,
            weight=1.0 / n,
        ))
    # mirror the descending half
    for i in range(n - half - 1, -1, -1):
        segments.append(segments[i])
    assert len(segments) == n
    return segments


def mean_slant_range(segments: list[PassSegment]) -> float:
    return float(sum(s.weight * s.slant_range_m for s in segments))
