import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkdlink import cvqkd, pdte

BASE = cvqkd.CVParams()


def test_confidence_coefficient():
    assert BASE.z_eps == pytest.approx(6.5, rel=0.01)


def test_pilot_photon_number():
    assert cvqkd.pilot_photon_number(BASE) == pytest.approx(7.8e7, rel=0.01)


def test_mutual_information_examples():
    assert cvqkd.mutual_information(1.0, 1.0, 1.0, 1.0) == 1.0
    assert cvqkd.mutual_information(0.0, 1.0, 1.0, 1.0) == 0.0
    assert cvqkd.mutual_information(5.0, 0.1, 1.05, 0.95) == \
        pytest.approx(0.95 * math.log2(1 + 0.5 / 1.05), rel=1e-12)


def test_fading_noise_examples():
    assert cvqkd.fading_noise(0.0, 0.5, 4.0) == 0.0
    assert cvqkd.fading_noise(0.01, 0.1, 4.0) == pytest.approx(4.0, rel=1e-12)


def test_fading_noise_reduced_by_grouping():
    """Per-group fading noise stays below the ungrouped value (law of total
    variance: grouping removes the between-group variance)."""
    dist = pdte.TransmittanceDistribution(
        np.array([1e-3, 2e-3, 0.1, 0.2]), np.array([0.3, 0.2, 0.3, 0.2]))
    t = np.sqrt(dist.grid)
    mean = float(np.dot(t, dist.probabilities))
    var = float(np.dot(t * t, dist.probabilities)) - mean**2
    global_fad = cvqkd.fading_noise(var, mean, 4.0)
    for mass, m_t, v_t in cvqkd._group_moments(dist, 2):
        assert cvqkd.fading_noise(v_t, m_t, 4.0) < global_fad


def test_pilot_phase_noise_components():
    # drift term alone: 2 pi * 10 kHz / 100 MHz
    p = cvqkd.CVParams(pilot_energy_j=1.0)  # pilot estimation negligible
    drift = 2 * math.pi * 1e4 / 1e8
    got = cvqkd.pilot_phase_noise(p, mean_t=1.0)
    assert got == pytest.approx(p.modulation_variance * drift, rel=1e-4)
    assert drift == pytest.approx(6.28e-4, rel=1e-2)


def test_entropy_g():
    assert cvqkd.entropy_g(1.0) == 0.0
    vals = [cvqkd.entropy_g(z) for z in (1.0, 1.5, 3.0, 10.0)]
    assert vals == sorted(vals)


def test_identity_channel_decouples_eve():
    assert cvqkd.holevo_bound(4.0, 1.0, 0.0, 1.0, 0.0) < 1e-9
    assert cvqkd.holevo_bound(4.0, 1.0, 0.0, 0.4, 0.1) < 1e-9


def test_holevo_nonnegative_random():
    rng = np.random.default_rng(5)
    for _ in range(100):
        chi = cvqkd.holevo_bound(rng.uniform(0.5, 20),
                                 10 ** rng.uniform(-3, 0),
                                 rng.uniform(0, 0.3),
                                 rng.uniform(0.2, 1.0),
                                 rng.uniform(0, 0.3))
        assert chi >= 0.0


def test_closed_form_vs_eigensolver():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        gamma = cvqkd.shared_state_covariance(rng.uniform(0.5, 20),
                                              10 ** rng.uniform(-3, 0),
                                              rng.uniform(0, 0.3))
        nu_cf = cvqkd.two_mode_symplectic(gamma)
        nu_es = cvqkd.symplectic_eigenvalues(gamma)
        worst = max(worst, abs(nu_cf[0] - nu_es[0]),
                    abs(nu_cf[1] - nu_es[1]))
    assert worst < 1e-9


def test_holevo_frozen_oracle():
    # values frozen from an independently assembled covariance computation
    assert cvqkd.holevo_bound(4.0, 0.5, 0.02, 0.4, 0.1) == \
        pytest.approx(0.320566508189, rel=1e-9)
    assert cvqkd.holevo_bound(10.0, 0.01, 0.1, 0.4, 0.1) == \
        pytest.approx(0.025726546641, rel=1e-9)
    assert cvqkd.holevo_bound(5.0, 0.25, 0.05, 1.0, 0.0) == \
        pytest.approx(0.594651505925, rel=1e-9)


def test_nonphysical_matrix_rejected():
    with pytest.raises(ValueError, match="eigenvalue"):
        cvqkd.holevo_bound(4.0, 0.5, -0.9, 0.4, 0.1)


def test_finite_leq_asymptotic():
    rng = np.random.default_rng(23)
    for _ in range(100):
        p = cvqkd.CVParams(modulation_variance=rng.uniform(0.5, 20),
                           xi_fix=rng.uniform(0, 0.05))
        stats = cvqkd.channel_stats(p, 10 ** rng.uniform(-1.5, 0),
                                    rng.uniform(0, 1e-4))
        asym = cvqkd.asymptotic_rate_cv(p, stats)
        fin = cvqkd.finite_rate_cv(p, stats, 10 ** rng.uniform(4, 12))
        assert fin <= asym + 1e-12


def test_finite_recovers_asymptotic():
    stats = cvqkd.channel_stats(BASE, 0.15, 1e-4)
    asym = cvqkd.asymptotic_rate_cv(BASE, stats)
    # worst-case bounds collapse onto the true parameters as m grows; the
    # factor 2 removes the half-for-estimation keying fraction
    fin = 2.0 * cvqkd.finite_rate_cv(BASE, stats, 1e30)
    assert fin == pytest.approx(asym, abs=1e-6)


def test_finite_zero_for_tiny_block():
    stats = cvqkd.channel_stats(BASE, 0.01, 0.0)
    assert cvqkd.finite_rate_cv(BASE, stats, 10.0) == 0.0


def test_rate_monotone_in_noise():
    for field, values in (("xi_fix", (0.0, 0.01, 0.03, 0.05)),
                          ("v_el", (0.0, 0.1, 0.2, 0.4))):
        rates = []
        for v in values:
            p = cvqkd.CVParams(**{field: v})
            stats = cvqkd.channel_stats(p, 0.15, 1e-4)
            rates.append(cvqkd.asymptotic_rate_cv(p, stats))
        assert rates == sorted(rates, reverse=True), field


def test_optimizer_beats_coarse_grid():
    dist = pdte.TransmittanceDistribution(
        np.array([0.005, 0.02, 0.08]), np.array([0.3, 0.4, 0.3]))
    res = cvqkd.optimize_cv(BASE, dist, 1e10, max_groups=4)
    # optimizer result at least matches a direct evaluation at its optimum
    moments = cvqkd._group_moments(dist, res.group_count)
    from dataclasses import replace
    p = replace(BASE, modulation_variance=res.modulation_variance)
    _, fin = cvqkd._grouped_rates(p, moments, 1e10)
    assert res.rate_finite == pytest.approx(fin, rel=1e-9)
    assert res.rate_finite <= res.rate_asymptotic + 1e-12


def test_params_validation():
    with pytest.raises(ValueError):
        cvqkd.CVParams(modulation_variance=0.0)
    with pytest.raises(ValueError):
        cvqkd.CVParams(beta=1.5)
    with pytest.raises(ValueError):
        cvqkd.CVParams(eta=0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 20), st.floats(-3, -0.1), st.floats(0, 0.2))
def test_chi_increases_with_noise(va, log_t2, xi):
    t2 = 10 ** log_t2
    lo = cvqkd.holevo_bound(va, t2, xi, 0.4, 0.1)
    hi = cvqkd.holevo_bound(va, t2, xi + 0.05, 0.4, 0.1)
    assert hi >= lo - 1e-12
