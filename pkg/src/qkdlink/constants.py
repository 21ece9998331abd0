"""Physical constants used across the simulator (SI units)."""

EARTH_RADIUS_M = 6371e3
GM_EARTH = 3.986004418e14  # m^3 / s^2

PLANCK = 6.62607015e-34  # J s
LIGHT_SPEED = 2.99792458e8  # m / s

# Solar spectral irradiance (W m^-2 nm^-1), ASTM-style reference values,
# used to rescale broadband background measurements between wavelengths.
SOLAR_IRRADIANCE_532NM = 1.86
SOLAR_IRRADIANCE_1550NM = 0.26
