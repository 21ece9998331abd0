import pytest

from qkdlink import turbulence as turb
from qkdlink.profiles import PROFILE_TARGETS, builtin_profile


@pytest.mark.parametrize("label", sorted(PROFILE_TARGETS))
def test_zenith_targets_reproduced(label):
    """Synthesized profiles hit their zenith r0/theta0 targets at 1550 nm."""
    r0_target, theta0_target = PROFILE_TARGETS[label]
    prof = builtin_profile(label)
    z, cn2, _ = turb.path_coordinates(prof, 90.0)
    r0 = turb.fried_parameter(z, cn2, 1550e-9)
    theta0 = turb.isoplanatic_angle(z, cn2, 1550e-9)
    assert r0 == pytest.approx(r0_target, rel=1e-6)
    assert theta0 == pytest.approx(theta0_target, rel=1e-6)


def test_night_weaker_than_day():
    for level in "0123":
        d = builtin_profile("D" + level)
        n = builtin_profile("N" + level)
        zd, cd, _ = turb.path_coordinates(d, 90.0)
        zn, cn, _ = turb.path_coordinates(n, 90.0)
        assert turb.fried_parameter(zn, cn, 1550e-9) > \
            turb.fried_parameter(zd, cd, 1550e-9)


def test_unknown_label():
    with pytest.raises(KeyError, match="available"):
        builtin_profile("X9")


def test_packaged_profile_files_match_builtin():
    from importlib import resources
    import numpy as np
    for label in ("D1", "N1"):
        ref = builtin_profile(label)
        with resources.as_file(
                resources.files("qkdlink") / "data" / "profiles"
                / f"{label}.txt") as path:
            loaded = turb.load_profile(path)
        assert np.allclose(loaded.cn2, ref.cn2, rtol=1e-5)
