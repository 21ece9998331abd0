"""Built-in synthetic turbulence profiles D0-D3 (day) and N0-N3 (night).

The measurement databases behind the published profiles are not available, so
stand-ins are synthesized from two basis shapes: an exponential ground layer
(decay height 250 m) and a Gaussian high-altitude bump centered at 10 km.
The two amplitudes are solved from a linear 2x2 system so that the zenith
Fried parameter and isoplanatic angle at 1550 nm match the published targets
on the same trapezoidal quadrature used in production.  The wind profile is a
Bufton-style jet plus a 5 m/s floor; for LEO passes the apparent wind from the
satellite slew dominates it at altitude.
"""

from __future__ import annotations

import math

import numpy as np

from .turbulence import TurbulenceProfile

REFERENCE_WAVELENGTH_M = 1550e-9

# Zenith targets: label -> (r0 m, theta0 rad)
PROFILE_TARGETS = {
    "D0": (0.248, 45.8e-6),
    "D1": (0.150, 34.5e-6),
    "D2": (0.106, 25.8e-6),
    "D3": (0.069, 18.1e-6),
    "N0": (0.686, 45.9e-6),
    "N1": (0.504, 34.4e-6),
    "N2": (0.378, 25.9e-6),
    "N3": (0.229, 18.1e-6),
}

_ALTITUDES_M = np.array([
    0.0, 50.0, 100.0, 200.0, 400.0, 700.0, 1100.0, 1600.0, 2000.0,
    2500.0, 4000.0, 6000.0, 8000.0, 9000.0, 10000.0, 11000.0, 12000.0,
    14000.0, 17000.0, 20000.0, 25000.0,
])

_GROUND_DECAY_M = 250.0
_BUMP_CENTER_M = 10000.0
_BUMP_WIDTH_M = 2500.0


def _basis_shapes(alt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ground = np.exp(-alt / _GROUND_DECAY_M)
    high = np.exp(-((alt - _BUMP_CENTER_M) / _BUMP_WIDTH_M) ** 2 / 2.0)
    high[alt < 2000.0] = 0.0
    return ground, high


def _wind_profile(alt: np.ndarray) -> np.ndarray:
    # Bufton-style tropospheric jet on a light surface wind
    return 5.0 + 20.0 * np.exp(-(((alt - 9400.0) / 4800.0) ** 2))


def builtin_profile(label: str) -> TurbulenceProfile:
    """Synthesize one of the built-in profiles by label (e.g. "D1")."""
    try:
        r0_target, theta0_target = PROFILE_TARGETS[label]
    except KeyError:
        raise KeyError(
            f"unknown profile {label!r}; available: {sorted(PROFILE_TARGETS)}"
        ) from None
    k = 2.0 * math.pi / REFERENCE_WAVELENGTH_M
    # invert the integrated-parameter definitions to target integrals
    i0_target = r0_target ** (-5.0 / 3.0) / (0.423 * k**2)
    i1_target = theta0_target ** (-5.0 / 3.0) / (2.91 * k**2)

    alt = _ALTITUDES_M
    ground, high = _basis_shapes(alt)
    m = np.array([
        [np.trapezoid(ground, alt), np.trapezoid(high, alt)],
        [np.trapezoid(alt ** (5.0 / 3.0) * ground, alt),
         np.trapezoid(alt ** (5.0 / 3.0) * high, alt)],
    ])
    a, b = np.linalg.solve(m, [i0_target, i1_target])
    if a <= 0 or b <= 0:
        raise RuntimeError(f"profile synthesis produced a non-physical fit for {label}")
    cn2 = a * ground + b * high
    return TurbulenceProfile(alt, cn2, _wind_profile(alt), label=label)


def profile_to_text(profile: TurbulenceProfile) -> str:
    """Serialize a profile in the three-column file format."""
    lines = [f"# turbulence profile {profile.label}",
             "# altitude_m cn2_m-2/3 wind_mps"]
    for alt, cn2, wind in zip(profile.altitudes_m, profile.cn2, profile.wind_mps):
        lines.append(f"{alt:.1f} {cn2:.6e} {wind:.3f}")
    return "\n".join(lines) + "\n"
