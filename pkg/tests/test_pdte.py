import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkdlink import pdte
from qkdlink.ao import CouplingStats
from qkdlink.orbit import PassSegment


def _segment(weight=1.0):
    return PassSegment(elevation_deg=90.0, slant_range_m=500e3,
                       slew_rate_rad_s=0.015, duration_s=1.0, weight=weight)


def test_weibull_parameters_frozen():
    # aperture 0.75 m, footprint 5 m (10 urad divergence at 500 km)
    eta0, shape, scale = pdte.weibull_parameters(0.75, 5.0)
    assert eta0 == pytest.approx(0.0440025181669, rel=1e-9)
    assert shape == pytest.approx(2.0000075884, rel=1e-9)
    assert scale == pytest.approx(3.5756561054, rel=1e-9)


def test_weibull_eta0_is_on_axis_transmittance():
    a, w = 0.6, 4.0
    eta0, _, _ = pdte.weibull_parameters(a, w)
    assert eta0 == pytest.approx(1.0 - math.exp(-2 * a * a / (w * w)),
                                 rel=1e-12)


def test_cdf_monotone_and_bounded():
    p = pdte.GeometricLossParams()
    eta = np.linspace(1e-6, 0.05, 400)
    cdf = pdte.geometric_transmittance_cdf(eta, p)
    assert np.all(np.diff(cdf) >= -1e-15)
    assert np.all((cdf >= 0) & (cdf <= 1))
    assert pdte.geometric_transmittance_cdf(
        np.array([0.05]), p)[0] == pytest.approx(1.0)


def test_geometric_pdte_mass_and_mean():
    p = pdte.GeometricLossParams()
    dist = pdte.geometric_pdte(p)
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    # mean transmittance below the on-axis maximum
    eta0, _, _ = pdte.weibull_parameters(p.aperture_radius_m,
                                         p.footprint_radius_m)
    assert 0 < dist.mean() < eta0


def test_geometric_pdte_point_mass_for_zero_jitter():
    p = pdte.GeometricLossParams(pointing_std_rad=1e-30)
    dist = pdte.geometric_pdte(p)
    assert np.count_nonzero(dist.probabilities) == 1
    eta0, _, _ = pdte.weibull_parameters(p.aperture_radius_m,
                                         p.footprint_radius_m)
    idx = int(np.argmax(dist.probabilities))
    assert dist.grid[idx] == pytest.approx(eta0, rel=1e-2)


def test_segment_pdte_identity_exact():
    """Unit coupling, unit extinction: the segment PDTE equals the input."""
    geo = pdte.geometric_pdte(pdte.GeometricLossParams())
    out = pdte.segment_pdte(_segment(), geo,
                            CouplingStats(mean=1.0, std_dev=0.0),
                            tau_atm=1.0, eta_opt=1.0)
    assert np.allclose(out.probabilities, geo.probabilities, atol=1e-15)


def test_segment_pdte_product_mean_independence():
    geo = pdte.geometric_pdte(pdte.GeometricLossParams())
    coupling = CouplingStats(mean=0.45, std_dev=0.08)
    tau_atm, eta_opt = 0.88, 10 ** -0.28
    out = pdte.segment_pdte(_segment(), geo, coupling, tau_atm, eta_opt)
    # independence: E[product] = product of E[...]  (discretization error only)
    expected = geo.mean() * coupling.mean * tau_atm * eta_opt
    assert out.mean() == pytest.approx(expected, rel=1e-3)


def test_merge_pass_weights():
    geo1 = pdte.geometric_pdte(pdte.GeometricLossParams(slant_range_m=500e3))
    geo2 = pdte.geometric_pdte(pdte.GeometricLossParams(slant_range_m=900e3))
    merged = pdte.merge_pass([(_segment(0.25), geo1), (_segment(0.75), geo2)])
    expected = 0.25 * geo1.mean() + 0.75 * geo2.mean()
    assert merged.mean() == pytest.approx(expected, rel=1e-12)


def test_partition_masses_exact():
    dist = pdte.geometric_pdte(pdte.GeometricLossParams())
    for k in (1, 2, 5, 12):
        weights = pdte.partition_weights(dist, k)
        for w in weights:
            assert w.sum() == pytest.approx(1.0 / k, abs=1e-12)
        total = np.sum(weights, axis=0)
        assert np.allclose(total, dist.probabilities, atol=1e-12)


def test_partition_recombination_linearity():
    dist = pdte.geometric_pdte(pdte.GeometricLossParams())
    t = np.sqrt(dist.grid)
    global_mean = float(np.dot(t, dist.probabilities))
    for k in (3, 7):
        groups = pdte.partition_groups(dist, k)
        recombined = sum(g.probability_mass * g.mean_T for g in groups)
        assert recombined == pytest.approx(global_mean, abs=1e-12)


def test_partition_group_bounds_ordered():
    dist = pdte.geometric_pdte(pdte.GeometricLossParams())
    groups = pdte.partition_groups(dist, 4)
    for a, b in zip(groups, groups[1:]):
        assert a.upper <= b.lower * (1 + 1e-9) or a.upper <= b.upper


def test_export_import_roundtrip(tmp_path):
    dist = pdte.geometric_pdte(pdte.GeometricLossParams())
    path = tmp_path / "dist.csv"
    pdte.export_csv(dist, path)
    header = path.read_text().splitlines()[0]
    assert header == "transmittance,probability"
    loaded = pdte.import_csv(path)
    assert np.allclose(loaded.grid, dist.grid, rtol=1e-10)
    assert loaded.mean() == pytest.approx(dist.mean(), rel=1e-9)


def test_distribution_validation():
    with pytest.raises(ValueError, match="sum"):
        pdte.TransmittanceDistribution(np.array([0.1, 0.2]),
                                       np.array([0.5, 0.6]))
    with pytest.raises(ValueError, match="increasing"):
        pdte.TransmittanceDistribution(np.array([0.2, 0.1]),
                                       np.array([0.5, 0.5]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 0.2), st.floats(0.5, 1.0),
       st.floats(0.3, 1.0))
def test_segment_pdte_mass_conserved(cmean, cstd, tau, eta_opt):
    geo = pdte.geometric_pdte(pdte.GeometricLossParams())
    out = pdte.segment_pdte(_segment(), geo,
                            CouplingStats(mean=cmean, std_dev=cstd),
                            tau_atm=tau, eta_opt=eta_opt)
    assert out.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
    # the product mean tracks the discretized (zero-truncated) coupling mean
    c_vals, c_mass = pdte.discretize_coupling(
        CouplingStats(mean=cmean, std_dev=cstd))
    expected = geo.mean() * float(np.dot(c_vals, c_mass)) * tau * eta_opt
    assert out.mean() == pytest.approx(expected, rel=1e-3)
