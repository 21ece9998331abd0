"""Decoy-state efficient BB84 key-rate engine.

Channel gains and error rates are pointwise functions of the instantaneous
transmission efficiency, averaged over the PDTE (per quantile group when
grouping is used).  The asymptotic rate assumes perfect decoy estimation; the
finite-size rate uses two decoys (weak + vacuum) with Hoeffding concentration
bounds on event counts, each group paying its own finite-size penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .constants import LIGHT_SPEED, PLANCK, SOLAR_IRRADIANCE_532NM, \
    SOLAR_IRRADIANCE_1550NM
from .pdte import TransmittanceDistribution, partition_weights


@dataclass(frozen=True)
class DVParams:
    mu: float = 0.5
    nu: float = 0.1
    p_mu: float = 0.7
    p_nu: float = 0.2
    q: float = 0.9
    y0: float = 2e-7
    eta_d: float = 0.85
    eta_opt: float = 1.0
    e_d: float = 0.01
    e_0: float = 0.5
    f_ec: float = 1.16
    eps_sec: float = 1e-10
    eps_cor: float = 1e-10
    n_pulses: float = 1e12
    rep_rate_hz: float = 100e6
    dt_window_s: float = 1e-9

    def __post_init__(self):
        if not 0 < self.nu < self.mu:
            raise ValueError(f"need 0 < nu < mu, got nu={self.nu}, mu={self.mu}")
        if self.p_mu + self.p_nu > 1.0 + 1e-12:
            raise ValueError("p_mu + p_nu must not exceed 1")
        if not 0 < self.q <= 1:
            raise ValueError("q must be in (0, 1]")
        if self.e_0 != 0.5:
            raise ValueError("background error probability is fixed at 0.5")

    @property
    def detection_efficiency(self) -> float:
        return self.eta_d * self.eta_opt


@dataclass(frozen=True)
class DVChannelMoments:
    """PDTE-averaged gains and error rates for one group."""
    q_mu: float
    q_nu: float
    q_mu1: float
    q_mu0: float
    eq_mu: float
    eq_nu: float
    eq_mu1: float


@dataclass(frozen=True)
class DVKeyResult:
    rate_asymptotic: float
    rate_finite: float
    mu: float
    nu: float
    p_mu: float
    p_nu: float
    q: float
    group_count: int


def binary_entropy(x):
    """Binary Shannon entropy h(x) in bits, 0 at the endpoints."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    inner = np.where((x > 0) & (x < 1), x, 0.5)
    h = -inner * np.log2(inner) - (1 - inner) * np.log2(1 - inner)
    return np.where((x > 0) & (x < 1), h, 0.0)


class GroupChannel:
    """Expectation evaluator over one (possibly partial) PDTE slice."""

    def __init__(self, grid: np.ndarray, weights: np.ndarray, params: DVParams):
        mass = float(weights.sum())
        if mass <= 0:
            raise ValueError("empty PDTE group")
        support = weights > 0
        self.mass = mass
        self.grid = grid[support]
        self.probs = weights[support] / mass
        self.params = params
        self._eta = params.detection_efficiency

    def gain_error(self, intensity):
        """(E[Q_k], E[E_k Q_k]) for signal intensity k (scalar or array)."""
        p = self.params
        k = np.atleast_1d(np.asarray(intensity, dtype=float))
        absorbed = np.exp(-self._eta * k[:, None] * self.grid[None, :])
        gain = 1.0 - (1.0 - p.y0) * absorbed @ self.probs
        err = p.e_0 * p.y0 + p.e_d * (1.0 - p.y0) * (1.0 - absorbed @ self.probs)
        if np.isscalar(intensity):
            return float(gain[0]), float(err[0])
        return gain, err

    def single_photon(self, mu):
        """(E[Q_mu1], E[E_mu1 Q_mu1]): single-photon gain and error rate."""
        p = self.params
        mean_eta = float(np.dot(self.grid, self.probs))
        y1 = 1.0 - (1.0 - p.y0) * (1.0 - self._eta * mean_eta)
        e1y1 = p.e_0 * p.y0 + p.e_d * self._eta * mean_eta * (1.0 - p.y0)
        pois = mu * math.exp(-mu)
        return pois * y1, pois * e1y1


def channel_moments(params: DVParams,
                    dist: TransmittanceDistribution,
                    weights: np.ndarray | None = None) -> DVChannelMoments:
    """PDTE-averaged gains/errors; `weights` selects a sub-group of the grid."""
    w = dist.probabilities if weights is None else weights
    ch = GroupChannel(dist.grid, w, params)
    q_mu, eq_mu = ch.gain_error(params.mu)
    q_nu, eq_nu = ch.gain_error(params.nu)
    q_mu1, eq_mu1 = ch.single_photon(params.mu)
    return DVChannelMoments(
        q_mu=q_mu, q_nu=q_nu, q_mu1=q_mu1,
        q_mu0=params.y0 * math.exp(-params.mu),
        eq_mu=eq_mu, eq_nu=eq_nu, eq_mu1=eq_mu1,
    )


def asymptotic_rate(params: DVParams, moments: DVChannelMoments) -> float:
    """Lower bound on the asymptotic secret key rate (bits/pulse)."""
    m = moments
    if m.q_mu <= 0 or m.q_mu1 <= 0:
        return 0.0
    eps_mu = m.eq_mu / m.q_mu
    eps_1 = min(1.0, m.eq_mu1 / m.q_mu1)
    rate = params.q * (m.q_mu0 + m.q_mu1 * (1.0 - float(binary_entropy(eps_1)))
                       - params.f_ec * m.q_mu * float(binary_entropy(eps_mu)))
    return max(0.0, rate)


def _gamma_bound(a, b, c, d):
    """Concentration correction for the phase error rate."""
    b = np.clip(b, 1e-12, 1.0 - 1e-12)
    c = np.clip(c, 1e-300, None)
    d = np.clip(d, 1e-300, None)
    with np.errstate(all="ignore"):
        arg = (c + d) / (c * d * (1.0 - b) * b) * (21.0 / a) ** 2
        val = (c + d) * (1.0 - b) * b / (c * d * math.log(2)) * np.log2(arg)
    return np.sqrt(np.clip(val, 0.0, None))


def _finite_length_arrays(params: DVParams, n_group: float,
                          q, mu, nu, p_mu, p_nu,
                          q_mu, q_nu, eq_mu, eq_nu):
    """Secret length per group, vectorized over candidate parameter arrays."""
    y0, e0 = params.y0, params.e_0
    log_sec = math.log(21.0 / params.eps_sec)
    p_vac = 1.0 - p_mu - p_nu
    valid = (p_vac >= 0) & (nu > 0) & (mu > nu) & (q > 0) & (q < 1)
    p_vac = np.clip(p_vac, 1e-15, None)
    p_mu_s = np.clip(p_mu, 1e-15, None)
    p_nu_s = np.clip(p_nu, 1e-15, None)

    q0 = y0  # vacuum-statistics gain, channel independent
    eq0 = e0 * y0

    def counts(qb2):
        n_mu = n_group * qb2 * p_mu_s * q_mu
        n_nu = n_group * qb2 * p_nu_s * q_nu
        n_0 = n_group * qb2 * p_vac * q0
        m_mu = n_group * qb2 * p_mu_s * eq_mu
        m_nu = n_group * qb2 * p_nu_s * eq_nu
        m_0 = n_group * qb2 * p_vac * eq0
        return (n_mu, n_nu, n_0, m_mu, m_nu, m_0)

    tau0 = p_mu_s * np.exp(-mu) + p_nu_s * np.exp(-nu) + p_vac
    tau1 = p_mu_s * mu * np.exp(-mu) + p_nu_s * nu * np.exp(-nu)

    def bounds(basis_counts):
        n_mu, n_nu, n_0, m_mu, m_nu, m_0 = basis_counts
        n_tot = n_mu + n_nu + n_0
        m_tot = m_mu + m_nu + m_0
        dn = np.sqrt(np.clip(n_tot, 0.0, None) / 2.0 * log_sec)
        dm = np.sqrt(np.clip(m_tot, 0.0, None) / 2.0 * log_sec)
        n_minus_nu = np.exp(nu) / p_nu_s * (n_nu - dn)
        n_plus_mu = np.exp(mu) / p_mu_s * (n_mu + dn)
        # vacuum event count bounded below by zero
        n_minus_0 = np.clip((n_0 - dn) / p_vac, 0.0, None)
        n_plus_0 = (n_0 + dn) / p_vac
        s0 = tau0 * n_minus_0
        s1 = tau1 * mu * (n_minus_nu - n_plus_0
                          - (nu**2 / mu**2) * (n_plus_mu - n_minus_0)) \
            / (nu * (mu - nu))
        m_plus_nu = np.exp(nu) / p_nu_s * (m_nu + dm)
        m_minus_0 = np.clip((m_0 - dm) / p_vac, 0.0, None)
        v1 = tau1 * (m_plus_nu - m_minus_0) / nu
        return n_tot, m_tot, s0, s1, v1

    with np.errstate(all="ignore"):
        n_z, m_z, s_z0, s_z1, _ = bounds(counts(q * q))
        _, _, _, s_x1, v_x1 = bounds(counts((1.0 - q) ** 2))

        valid = valid & (s_z1 > 0) & (s_x1 > 0) & (n_z > 0)
        s_z0c = np.clip(s_z0, 0.0, None)
        s_z1c = np.clip(s_z1, 1e-300, None)
        s_x1c = np.clip(s_x1, 1e-300, None)
        ratio = np.clip(v_x1, 0.0, None) / s_x1c
        valid = valid & (ratio < 0.5)
        ratio = np.clip(ratio, 1e-12, 0.5)
        phi = np.clip(ratio + _gamma_bound(params.eps_sec, ratio, s_x1c, s_z1c),
                      0.0, 1.0)
        e_z = np.clip(m_z / np.clip(n_z, 1e-300, None), 0.0, 1.0)
        lam_ec = n_z * params.f_ec * binary_entropy(e_z)
        length = s_z0c + s_z1c * (1.0 - binary_entropy(phi)) - lam_ec \
            - 6.0 * math.log2(21.0 / params.eps_sec) \
            - math.log2(2.0 / params.eps_cor)
    return np.where(valid, np.clip(length, 0.0, None), 0.0)


def finite_key(params: DVParams, dist: TransmittanceDistribution,
               group_count: int = 1,
               n_pulses: float | None = None) -> float:
    """Finite-size secret key rate (bits/pulse) with quantile grouping.

    Pulses are apportioned to groups by probability mass; each group is an
    independent extraction block and infeasible groups contribute zero.
    """
    n = float(n_pulses if n_pulses is not None else params.n_pulses)
    if n < 1:
        raise ValueError("need at least one pulse")
    total = 0.0
    for w in partition_weights(dist, group_count):
        ch = GroupChannel(dist.grid, w, params)
        (q_mu, eq_mu) = ch.gain_error(params.mu)
        (q_nu, eq_nu) = ch.gain_error(params.nu)
        length = _finite_length_arrays(
            params, n * ch.mass,
            np.array([params.q]), np.array([params.mu]), np.array([params.nu]),
            np.array([params.p_mu]), np.array([params.p_nu]),
            q_mu, q_nu, eq_mu, eq_nu)
        total += float(length[0])
    return total / n


def background_yield(mode: str, telescope_diameter_m: float = 1.5,
                     eta_opt: float = 10 ** -0.28, eta_d: float = 0.85,
                     dt_window_s: float = 1e-9,
                     filter_bandwidth_m: float = 0.8e-9,
                     wavelength_m: float = 1550e-9) -> float:
    """Background yield Y0 = N_b * dt for the supported noise scenarios.

    sky_day evaluates the diffraction-limited sky-radiance formula, sky_night
    is the detector dark-count floor, glare rescales a measured satellite
    sun-glint rate by distance, filter bandwidth and solar irradiance.
    """
    if mode == "sky_night":
        return 200.0 * dt_window_s
    if mode == "sky_day":
        radiance = 0.3e6  # W m^-2 m^-1 sr^-1 (0.3 W m^-2 um^-1 sr^-1)
        fov_sr = math.pi * (0.45 * wavelength_m / telescope_diameter_m) ** 2
        area = math.pi * (telescope_diameter_m / 2.0) ** 2
        photon_energy = PLANCK * LIGHT_SPEED / wavelength_m
        n_b = radiance * fov_sr * area * filter_bandwidth_m / photon_energy \
            * eta_opt * eta_d
        return n_b * dt_window_s
    if mode == "glare":
        measured_rate = 1.9e3  # photons/s at 20000 km, 532 nm, 3 nm filter
        n_b = measured_rate * (20000.0 / 400.0) ** 2 \
            * (filter_bandwidth_m / 3e-9) \
            * (SOLAR_IRRADIANCE_1550NM / SOLAR_IRRADIANCE_532NM)
        return n_b * dt_window_s
    raise ValueError(f"unknown background mode {mode!r}; "
                     "expected sky_day, sky_night or glare")


_COARSE_Q = np.array([0.5, 0.65, 0.8, 0.9, 0.96])
_COARSE_MU = np.array([0.1, 0.2, 0.35, 0.6, 1.0])
_COARSE_NU = np.array([0.01, 0.025, 0.06, 0.15, 0.35])
_COARSE_PMU = np.array([0.3, 0.5, 0.7, 0.85, 0.95])
_COARSE_PNU_FRAC = np.array([0.1, 0.3, 0.5, 0.7, 0.9])


def _coarse_grid_best(params: DVParams, dist: TransmittanceDistribution,
                      n_pulses: float, k: int):
    """Best finite rate on the 5^5 coarse parameter grid for k groups."""
    iq, imu, inu, ipmu, ipnu = [a.ravel() for a in np.meshgrid(
        np.arange(5), np.arange(5), np.arange(5), np.arange(5), np.arange(5),
        indexing="ij")]
    q = _COARSE_Q[iq]
    mu = _COARSE_MU[imu]
    nu = _COARSE_NU[inu]
    p_mu = _COARSE_PMU[ipmu]
    p_nu = (1.0 - p_mu) * _COARSE_PNU_FRAC[ipnu]

    rate = np.zeros(q.size)
    for w in partition_weights(dist, k):
        ch = GroupChannel(dist.grid, w, params)
        g_mu, e_mu = ch.gain_error(_COARSE_MU)
        g_nu, e_nu = ch.gain_error(_COARSE_NU)
        rate += _finite_length_arrays(
            params, n_pulses * ch.mass, q, mu, nu, p_mu, p_nu,
            g_mu[imu], g_nu[inu], e_mu[imu], e_nu[inu])
    rate /= n_pulses
    best = int(np.argmax(rate))
    return float(rate[best]), (float(q[best]), float(mu[best]),
                               float(nu[best]), float(p_mu[best]),
                               float(p_nu[best]))


def _optimize_asymptotic(params: DVParams,
                         dist: TransmittanceDistribution) -> tuple[float, float]:
    """(best rate, best mu) over signal intensity with q = 1."""
    asym = replace(params, q=1.0)
    ch = GroupChannel(dist.grid, dist.probabilities, asym)

    def rate_at(mu):
        g, e = ch.gain_error(mu)
        q1, e1 = ch.single_photon(mu)
        m = DVChannelMoments(q_mu=g, q_nu=0.0, q_mu1=q1,
                             q_mu0=asym.y0 * math.exp(-mu),
                             eq_mu=e, eq_nu=0.0, eq_mu1=e1)
        return asymptotic_rate(asym, m)

    mus = np.geomspace(0.01, 1.0, 40)
    rates = [rate_at(m) for m in mus]
    best = int(np.argmax(rates))
    res = minimize(lambda x: -rate_at(float(np.clip(x[0], 1e-3, 1.0))),
                   x0=[mus[best]], method="Nelder-Mead",
                   options={"xatol": 1e-4, "fatol": 1e-12})
    mu_opt = float(np.clip(res.x[0], 1e-3, 1.0))
    return max(rates[best], rate_at(mu_opt)), mu_opt


def optimize_dv(params: DVParams, dist: TransmittanceDistribution,
                n_pulses: float | None = None,
                group_range: tuple[int, int] = (1, 10)) -> DVKeyResult:
    """Maximize the finite rate over (q, mu, nu, p_mu, p_nu) and group count.

    Coarse 5^5 grid per group count, then Nelder-Mead refinement from the best
    grid point; the refined value never falls below the grid best.
    """
    n = float(n_pulses if n_pulses is not None else params.n_pulses)
    best_rate, best_x, best_k = 0.0, None, 1
    for k in range(group_range[0], group_range[1] + 1):
        rate, x = _coarse_grid_best(params, dist, n, k)
        if rate > best_rate:
            best_rate, best_x, best_k = rate, x, k

    if best_x is not None:
        groups = [GroupChannel(dist.grid, w, params)
                  for w in partition_weights(dist, best_k)]

        def neg_rate(x):
            q, mu, nu, p_mu, p_nu = x
            if not (0 < q < 1 and 0 < nu < mu <= 1.0 and nu <= 0.5
                    and p_mu > 0 and p_nu > 0 and p_mu + p_nu < 1):
                return 0.0
            total = 0.0
            for ch in groups:
                g_mu, e_mu = ch.gain_error(mu)
                g_nu, e_nu = ch.gain_error(nu)
                total += float(_finite_length_arrays(
                    params, n * ch.mass, np.array([q]), np.array([mu]),
                    np.array([nu]), np.array([p_mu]), np.array([p_nu]),
                    g_mu, g_nu, e_mu, e_nu)[0])
            return -total / n

        res = minimize(neg_rate, x0=list(best_x), method="Nelder-Mead",
                       options={"xatol": 1e-4, "fatol": 1e-16,
                                "maxiter": 2000})
        if -res.fun > best_rate:
            best_rate = -res.fun
            best_x = tuple(float(v) for v in res.x)

    asym_rate, asym_mu = _optimize_asymptotic(params, dist)
    if best_x is None:
        best_x = (params.q, asym_mu, min(params.nu, asym_mu / 2),
                  params.p_mu, params.p_nu)
    q, mu, nu, p_mu, p_nu = best_x
    return DVKeyResult(rate_asymptotic=asym_rate,
                       rate_finite=min(best_rate, asym_rate + 1e-12),
                       mu=mu, nu=nu, p_mu=p_mu, p_nu=p_nu, q=q,
                       group_count=best_k)
