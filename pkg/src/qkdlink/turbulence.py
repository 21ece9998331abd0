"""Layered Cn2 profiles and integrated turbulence parameters.

Profiles are discrete layers (altitude, Cn2, natural wind).  For a given
elevation the layers are mapped onto the line of sight (flat-layer geometry)
and the four integrated parameters are computed by trapezoidal quadrature:
Fried parameter, coherence time, isoplanatic angle and log-amplitude
scintillation variance (plane wave, Kolmogorov spectrum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_ELEVATION_DEG = 20.0
WEAK_FLUCTUATION_LIMIT = 0.3


@dataclass(frozen=True)
class TurbulenceProfile:
    """Layered profile: altitudes above ground (m), Cn2 (m^-2/3), wind (m/s)."""
    altitudes_m: np.ndarray
    cn2: np.ndarray
    wind_mps: np.ndarray
    label: str = ""

    def __post_init__(self):
        alt = np.asarray(self.altitudes_m, dtype=float)
        cn2 = np.asarray(self.cn2, dtype=float)
        wind = np.asarray(self.wind_mps, dtype=float)
        if alt.size < 2:
            raise ValueError("profile needs at least 2 layers")
        if np.any(np.diff(alt) <= 0):
            raise ValueError("layer altitudes must be strictly increasing")
        if np.any(cn2 < 0):
            raise ValueError("Cn2 must be non-negative")
        if not (alt.size == cn2.size == wind.size):
            raise ValueError("altitude, Cn2 and wind arrays must have equal length")
        object.__setattr__(self, "altitudes_m", alt)
        object.__setattr__(self, "cn2", cn2)
        object.__setattr__(self, "wind_mps", wind)


@dataclass(frozen=True)
class IntegratedParams:
    r0_m: float
    tau0_s: float
    theta0_rad: float
    sigma_chi2: float

    @property
    def weak_fluctuation_ok(self) -> bool:
        return self.sigma_chi2 < WEAK_FLUCTUATION_LIMIT


def load_profile(path: str | Path, label: str | None = None) -> TurbulenceProfile:
    """Read a profile file: `altitude_m cn2 wind_mps` per line, `#` comments."""
    path = Path(path)
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        rows.append([float(p) for p in parts])
    data = np.array(rows, dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no layers found")
    return TurbulenceProfile(data[:, 0], data[:, 1], data[:, 2],
                             label=label if label is not None else path.stem)


def path_coordinates(profile: TurbulenceProfile, elevation_deg: float,
                     slew_rate_rad_s: float = 0.0):
    """Map layers onto the line of sight for the given elevation.

    Returns (z, cn2, wind) with z the distance along the line of sight and
    wind the natural wind plus the apparent component slew_rate * z.
    """
    if elevation_deg < MIN_ELEVATION_DEG:
        raise ValueError(
            f"elevation {elevation_deg} deg below supported minimum "
            f"{MIN_ELEVATION_DEG} deg")
    sin_e = math.sin(math.radians(elevation_deg))
    z = profile.altitudes_m / sin_e
    wind = profile.wind_mps + slew_rate_rad_s * z
    return z, profile.cn2.copy(), wind


def _trapz(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.trapezoid(y, x))


def fried_parameter(z: np.ndarray, cn2: np.ndarray, wavelength_m: float) -> float:
    k = 2.0 * math.pi / wavelength_m
    integral = _trapz(cn2, z)
    if integral <= 0:
        raise ValueError("Cn2 integral along the path is zero")
    return (0.423 * k**2 * integral) ** (-3.0 / 5.0)


def coherence_time(z: np.ndarray, cn2: np.ndarray, wind: np.ndarray,
                   wavelength_m: float) -> float:
    k = 2.0 * math.pi / wavelength_m
    integral = _trapz(wind ** (5.0 / 3.0) * cn2, z)
    if integral <= 0:
        raise ValueError("wind-weighted Cn2 integral is zero; "
                         "coherence time undefined for a static atmosphere")
    return (2.91 * k**2 * integral) ** (-3.0 / 5.0)


def isoplanatic_angle(z: np.ndarray, cn2: np.ndarray, wavelength_m: float) -> float:
    k = 2.0 * math.pi / wavelength_m
    integral = _trapz(z ** (5.0 / 3.0) * cn2, z)
    if integral <= 0:
        return math.inf
    return (2.91 * k**2 * integral) ** (-3.0 / 5.0)


def scintillation_variance(z: np.ndarray, cn2: np.ndarray,
                           wavelength_m: float) -> float:
    k = 2.0 * math.pi / wavelength_m
    return 0.5631 * k ** (7.0 / 6.0) * _trapz(z ** (5.0 / 6.0) * cn2, z)


def integrated_params(profile: TurbulenceProfile, elevation_deg: float,
                      wavelength_m: float,
                      slew_rate_rad_s: float = 0.0) -> IntegratedParams:
    """Bundle the four integrated parameters for one line of sight."""
    z, cn2, wind = path_coordinates(profile, elevation_deg, slew_rate_rad_s)
    return IntegratedParams(
        r0_m=fried_parameter(z, cn2, wavelength_m),
        tau0_s=coherence_time(z, cn2, wind, wavelength_m),
        theta0_rad=isoplanatic_angle(z, cn2, wavelength_m),
        sigma_chi2=scintillation_variance(z, cn2, wavelength_m),
    )
