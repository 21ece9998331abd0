import math

import numpy as np
import pytest

from qkdlink import turbulence as turb
from qkdlink.profiles import builtin_profile


@pytest.fixture(scope="module")
def d1():
    return builtin_profile("D1")


def _params(profile, elev, slew=0.0):
    return turb.integrated_params(profile, elev, 1550e-9, slew)


def test_elevation_scaling_exponents(d1):
    """Flat-layer mapping implies power-law scalings with sin(elevation)."""
    z90 = _params(d1, 90.0)
    z30 = _params(d1, 30.0)
    s = math.sin(math.radians(30.0))
    assert z30.r0_m / z90.r0_m == pytest.approx(s ** (3 / 5), rel=1e-9)
    assert z30.theta0_rad / z90.theta0_rad == pytest.approx(s ** (8 / 5),
                                                           rel=1e-9)
    assert z30.sigma_chi2 / z90.sigma_chi2 == pytest.approx(s ** (-11 / 6),
                                                            rel=1e-9)


def test_coherence_time_uniform_wind_identity():
    # for uniform wind V, tau0 = 0.314 r0 / V (plane-wave Kolmogorov)
    alt = np.linspace(0.0, 20000.0, 50)
    cn2 = 1e-16 * np.exp(-alt / 1500.0)
    v = 12.0
    prof = turb.TurbulenceProfile(alt, cn2, np.full(alt.size, v))
    z, c, w = turb.path_coordinates(prof, 90.0)
    r0 = turb.fried_parameter(z, c, 1550e-9)
    tau0 = turb.coherence_time(z, c, w, 1550e-9)
    assert tau0 == pytest.approx(0.314 * r0 / v, rel=0.01)


def test_apparent_wind_dominates_tau0(d1):
    # with no natural wind, the slew-induced wind gives tau0 = theta0 / slew
    still = turb.TurbulenceProfile(d1.altitudes_m, d1.cn2,
                                   np.zeros_like(d1.wind_mps))
    slew = 0.015  # rad/s, zenith slew of a 500 km orbit
    p = turb.integrated_params(still, 90.0, 1550e-9, slew)
    assert p.tau0_s == pytest.approx(p.theta0_rad / slew, rel=1e-9)
    # natural wind only shortens it further
    p_wind = _params(d1, 90.0, slew)
    assert p_wind.tau0_s < p.tau0_s


def test_min_elevation_enforced(d1):
    with pytest.raises(ValueError):
        turb.path_coordinates(d1, 10.0)


def test_isoplanatic_angle_infinite_for_ground_only():
    alt = np.array([0.0, 1.0])
    prof = turb.TurbulenceProfile(alt, np.array([1e-14, 0.0]),
                                  np.array([5.0, 5.0]))
    z, c, _ = turb.path_coordinates(prof, 90.0)
    assert math.isinf(turb.isoplanatic_angle(z, c, 1550e-9))


def test_weak_fluctuation_flag(d1):
    p = _params(d1, 90.0)
    assert p.weak_fluctuation_ok == (p.sigma_chi2 < 0.3)


def test_load_profile_roundtrip(tmp_path, d1):
    from qkdlink.profiles import profile_to_text
    f = tmp_path / "d1.txt"
    f.write_text(profile_to_text(d1))
    loaded = turb.load_profile(f)
    assert np.allclose(loaded.altitudes_m, d1.altitudes_m)
    assert np.allclose(loaded.cn2, d1.cn2, rtol=1e-5)
    assert np.allclose(loaded.wind_mps, d1.wind_mps, rtol=1e-3)


def test_load_profile_bad_columns(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("0.0 1e-15\n")
    with pytest.raises(ValueError, match="3 columns"):
        turb.load_profile(f)


def test_profile_validation():
    with pytest.raises(ValueError):
        turb.TurbulenceProfile(np.array([0.0, 0.0]), np.array([1e-15, 1e-15]),
                               np.array([5.0, 5.0]))
    with pytest.raises(ValueError):
        turb.TurbulenceProfile(np.array([0.0, 100.0]),
                               np.array([-1e-15, 1e-15]),
                               np.array([5.0, 5.0]))
