"""Gaussian-modulated coherent-state CV-QKD key-rate engine.

Heterodyne detection with trusted (calibrated) detector noise.  The channel is
characterized per transmittance group by the mean and variance of the
transmission coefficient T = sqrt(eta); transmittance fluctuations enter as
fading excess noise, and the pilot-tone phase recovery contributes a
shot-noise-limited estimation term plus a laser-drift term.  Asymptotic rates
are Devetak-Winter differences; finite-size rates evaluate the same bound at
worst-case channel parameters estimated from half of each group's symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfinv

from .constants import LIGHT_SPEED, PLANCK
from .pdte import TransmittanceDistribution, partition_weights

_SIGMA_Z = np.diag([1.0, -1.0])
_I2 = np.eye(2)

V_A_RANGE = (0.5, 20.0)
MAX_GROUPS = 12


@dataclass(frozen=True)
class CVParams:
    """Protocol and hardware parameters (variances in shot-noise units)."""
    modulation_variance: float = 5.0
    beta: float = 0.95
    eta: float = 0.4
    v_el: float = 0.1
    xi_fix: float = 0.01
    pilot_energy_j: float = 10e-12
    pilot_drift_hz: float = 10e3
    symbol_rate_hz: float = 100e6
    wavelength_m: float = 1550e-9
    eps_pe: float = 1e-10

    def __post_init__(self):
        if self.modulation_variance <= 0:
            raise ValueError("modulation variance must be positive")
        if not 0 < self.beta <= 1:
            raise ValueError("reconciliation efficiency must be in (0, 1]")
        if not 0 < self.eta <= 1:
            raise ValueError("detector efficiency must be in (0, 1]")
        if self.v_el < 0 or self.xi_fix < 0:
            raise ValueError("noise variances must be non-negative")
        if not 0 < self.eps_pe < 1:
            raise ValueError("eps_pe must be in (0, 1)")

    @property
    def z_eps(self) -> float:
        """Confidence coefficient sqrt(2) * erfinv(1 - eps_pe)."""
        return math.sqrt(2.0) * float(erfinv(1.0 - self.eps_pe))


@dataclass(frozen=True)
class CVChannelStats:
    mean_T: float
    var_T: float
    xi_total: float
    sigma2: float

    def __post_init__(self):
        if self.var_T < 0:
            raise ValueError("transmission-coefficient variance must be >= 0")


@dataclass(frozen=True)
class CVKeyResult:
    rate_asymptotic: float
    rate_finite: float
    modulation_variance: float
    group_count: int


def mutual_information(v_a: float, t2: float, sigma2: float,
                       beta: float) -> float:
    """Reconciled mutual information beta * log2(1 + T^2 V_A / sigma^2)."""
    if t2 <= 0 or v_a <= 0:
        return 0.0
    return beta * math.log2(1.0 + t2 * v_a / sigma2)


def fading_noise(var_t: float, mean_t: float, v_a: float) -> float:
    """Excess noise from transmission-coefficient fluctuations."""
    if var_t <= 0:
        return 0.0
    if mean_t <= 0:
        raise ValueError("mean transmission coefficient must be positive")
    return var_t / (mean_t * mean_t) * v_a


def pilot_photon_number(params: CVParams) -> float:
    """Photons per pilot pulse, E_P / (h c / lambda)."""
    return params.pilot_energy_j * params.wavelength_m / (PLANCK * LIGHT_SPEED)


def pilot_phase_noise(params: CVParams, mean_t: float) -> float:
    """Phase-noise contribution of the pilot recovery, in SNU.

    Two terms, both small-angle: shot-noise-limited estimation of the pilot
    phase, variance 1/(eta T^2 n_P), and linear laser drift over one symbol,
    variance 2 pi dnu_P / f_TX.  Both models are intentionally isolated here.
    """
    if mean_t <= 0:
        raise ValueError("mean transmission coefficient must be positive")
    n_p = pilot_photon_number(params)
    var_est = 1.0 / (params.eta * mean_t * mean_t * n_p)
    var_drift = 2.0 * math.pi * params.pilot_drift_hz / params.symbol_rate_hz
    return params.modulation_variance * (var_est + var_drift)


def noise_variance(params: CVParams, t2: float, xi_total: float) -> float:
    """Total noise variance at Bob: shot noise, channel excess noise
    (input-referred) and the calibrated detector contribution."""
    return 1.0 + t2 * xi_total + (params.v_el + (1.0 - params.eta)) / params.eta


def channel_stats(params: CVParams, mean_t: float, var_t: float) -> CVChannelStats:
    xi = (params.xi_fix
          + fading_noise(var_t, mean_t, params.modulation_variance)
          + pilot_phase_noise(params, mean_t))
    t2 = mean_t * mean_t
    return CVChannelStats(mean_T=mean_t, var_T=var_t, xi_total=xi,
                          sigma2=noise_variance(params, t2, xi))


def entropy_g(z) -> float:
    """Bosonic entropy function g(z) of a symplectic eigenvalue z >= 1."""
    z = np.asarray(z, dtype=float)
    zp = np.clip((z + 1.0) / 2.0, 1.0, None)
    zm = np.clip((z - 1.0) / 2.0, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = zp * np.log2(zp) - np.where(zm > 0, zm * np.log2(zm), 0.0)
    return float(np.sum(out))


def _omega(n_modes: int) -> np.ndarray:
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), w)


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix via eig(i Omega Gamma)."""
    n = gamma.shape[0] // 2
    ev = np.linalg.eigvals(1j * _omega(n) @ gamma)
    nu = np.sort(np.abs(ev))[::2][::-1]  # each value appears as a +/- pair
    return np.ascontiguousarray(nu)


def two_mode_symplectic(gamma: np.ndarray) -> tuple[float, float]:
    """Closed-form symplectic eigenvalues of a 4x4 covariance matrix."""
    a = np.linalg.det(gamma[:2, :2])
    b = np.linalg.det(gamma[2:, 2:])
    c = np.linalg.det(gamma[:2, 2:])
    delta = a + b + 2.0 * c
    disc = max(delta * delta - 4.0 * np.linalg.det(gamma), 0.0)
    nu1 = math.sqrt(max((delta + math.sqrt(disc)) / 2.0, 0.0))
    nu2 = math.sqrt(max((delta - math.sqrt(disc)) / 2.0, 0.0))
    return max(nu1, nu2), min(nu1, nu2)


def shared_state_covariance(v_a: float, t2: float, xi: float) -> np.ndarray:
    """Entanglement-based covariance of Alice and Bob's modes after the channel."""
    v = v_a + 1.0
    c = math.sqrt(max(t2 * (v * v - 1.0), 0.0))
    b = t2 * (v - 1.0) + 1.0 + t2 * xi
    gamma = np.zeros((4, 4))
    gamma[:2, :2] = v * _I2
    gamma[2:, 2:] = b * _I2
    gamma[:2, 2:] = c * _SIGMA_Z
    gamma[2:, :2] = c * _SIGMA_Z
    return gamma


def _check_physical(gamma: np.ndarray, context: str) -> None:
    nu = symplectic_eigenvalues(gamma)
    if np.any(nu < 1.0 - 1e-9):
        raise ValueError(
            f"non-physical covariance matrix ({context}): smallest symplectic "
            f"eigenvalue {nu.min():.6g} < 1")


def holevo_bound(v_a: float, t2: float, xi_total: float, eta: float,
                 v_el: float) -> float:
    """Eavesdropper information chi_BE for heterodyne with trusted detector.

    The detector is modeled as a beamsplitter of transmission eta whose dark
    port carries half of an EPR pair with variance v_d = 1 + 2 v_el/(1 - eta),
    so the detected quadrature variance reproduces eta(x) + 1 - eta + 2 v_el.
    chi_BE = S(shared state) - S(remote modes | heterodyne outcome).
    """
    if t2 <= 0:
        return 0.0
    gamma_ab = shared_state_covariance(v_a, t2, xi_total)
    _check_physical(gamma_ab, "shared state")
    nu1, nu2 = two_mode_symplectic(gamma_ab)
    s_ab = entropy_g(nu1) + entropy_g(nu2)
    if nu1 - 1.0 < 1e-12:  # pure shared state, Eve decoupled
        return 0.0

    if eta >= 1.0 and v_el > 0:
        eta = 1.0 - 1e-9
    v_d = 1.0 if eta >= 1.0 else 1.0 + 2.0 * v_el / (1.0 - eta)

    # modes: A (0), B (1), F (2, enters the beamsplitter), G (3, kept)
    gamma = np.eye(8)
    gamma[:4, :4] = gamma_ab
    gamma[4:6, 4:6] = v_d * _I2
    gamma[6:, 6:] = v_d * _I2
    c_fg = math.sqrt(max(v_d * v_d - 1.0, 0.0))
    gamma[4:6, 6:] = c_fg * _SIGMA_Z
    gamma[6:, 4:6] = c_fg * _SIGMA_Z

    s = np.eye(8)
    rt, rr = math.sqrt(eta), math.sqrt(1.0 - eta)
    s[2:4, 2:4] = rt * _I2
    s[2:4, 4:6] = rr * _I2
    s[4:6, 2:4] = -rr * _I2
    s[4:6, 4:6] = rt * _I2
    gamma = s @ gamma @ s.T

    keep = [0, 1, 4, 5, 6, 7]  # A, F', G
    meas = [2, 3]              # detected output mode
    g_k = gamma[np.ix_(keep, keep)]
    g_m = gamma[np.ix_(meas, meas)]
    g_km = gamma[np.ix_(keep, meas)]
    # heterodyne conditioning on the detected mode
    g_cond = g_k - g_km @ np.linalg.solve(g_m + _I2, g_km.T)
    s_cond = entropy_g(symplectic_eigenvalues(g_cond))
    return max(0.0, s_ab - s_cond)


def asymptotic_rate_cv(params: CVParams, stats: CVChannelStats) -> float:
    """Devetak-Winter rate beta I_AB - chi_BE, clamped at zero."""
    t2 = stats.mean_T * stats.mean_T
    if t2 <= 0:
        return 0.0
    i_ab = mutual_information(params.modulation_variance, t2, stats.sigma2,
                              params.beta)
    chi = holevo_bound(params.modulation_variance, t2, stats.xi_total,
                       params.eta, params.v_el)
    return max(0.0, i_ab - chi)


def worst_case_stats(params: CVParams, stats: CVChannelStats,
                     m: float) -> CVChannelStats | None:
    """Pessimistic channel estimate from m parameter-estimation symbols.

    Returns None when the transmission-coefficient lower bound is not
    positive (no key can be certified).
    """
    if m < 1:
        raise ValueError("parameter-estimation symbol count must be >= 1")
    z = params.z_eps
    tau = stats.mean_T * stats.mean_T
    xi = stats.xi_total
    t_min = stats.mean_T - z * math.sqrt(
        (1.0 + tau * xi) / (m * params.modulation_variance))
    if t_min <= 0:
        return None
    sigma2_max = 1.0 + tau * xi + z * (1.0 + tau * xi) * math.sqrt(2.0 / m)
    tau_min = t_min * t_min
    xi_worst = (sigma2_max - 1.0) / tau_min
    return CVChannelStats(mean_T=t_min, var_T=stats.var_T, xi_total=xi_worst,
                          sigma2=noise_variance(params, tau_min, xi_worst))


def finite_rate_cv(params: CVParams, stats: CVChannelStats, m: float) -> float:
    """Finite-size rate: worst-case Devetak-Winter times the keying fraction.

    m is the number of symbols spent on parameter estimation; an equal number
    is assumed to remain for key extraction (half/half split), so the rate per
    transmitted symbol carries a factor 1/2.
    """
    worst = worst_case_stats(params, stats, m)
    if worst is None:
        return 0.0
    return 0.5 * asymptotic_rate_cv(params, worst)


def _group_moments(dist: TransmittanceDistribution,
                   k: int) -> list[tuple[float, float, float]]:
    """(mass, mean_T, var_T) per equal-mass quantile group."""
    t = np.sqrt(dist.grid)
    out = []
    for w in partition_weights(dist, k):
        mass = float(w.sum())
        if mass <= 0:
            out.append((0.0, 0.0, 0.0))
            continue
        mean_t = float(np.dot(w, t)) / mass
        var_t = max(0.0, float(np.dot(w, t * t)) / mass - mean_t * mean_t)
        out.append((mass, mean_t, var_t))
    return out


def _grouped_rates(params: CVParams, moments, total_symbols: float
                   ) -> tuple[float, float]:
    """Mass-weighted (asymptotic, finite) rates over precomputed groups."""
    asym = fin = 0.0
    for mass, mean_t, var_t in moments:
        if mass <= 0 or mean_t <= 0:
            continue
        stats = channel_stats(params, mean_t, var_t)
        asym += mass * asymptotic_rate_cv(params, stats)
        m_pe = total_symbols * mass / 2.0
        if m_pe >= 1:
            fin += mass * finite_rate_cv(params, stats, m_pe)
    return asym, fin


def optimize_cv(params: CVParams, dist: TransmittanceDistribution,
                total_symbols: float,
                max_groups: int = MAX_GROUPS) -> CVKeyResult:
    """Maximize the mass-weighted finite rate over V_A and the group count."""
    lo, hi = V_A_RANGE
    coarse_va = np.linspace(lo, hi, 14)
    best = (0.0, lo, 1)
    moments_by_k = {}
    for k in range(1, max_groups + 1):
        moments = _group_moments(dist, k)
        moments_by_k[k] = moments
        for v_a in coarse_va:
            p = replace(params, modulation_variance=float(v_a))
            _, fin = _grouped_rates(p, moments, total_symbols)
            if fin > best[0] + 1e-15:
                best = (fin, float(v_a), k)
    fin0, va0, k0 = best
    if fin0 > 0:
        res = minimize_scalar(
            lambda v: -_grouped_rates(
                replace(params, modulation_variance=float(v)),
                moments_by_k[k0], total_symbols)[1],
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-3})
        if -res.fun > fin0:
            fin0, va0 = -float(res.fun), float(res.x)
    p_best = replace(params, modulation_variance=va0)
    asym, fin = _grouped_rates(p_best, moments_by_k[k0], total_symbols)
    return CVKeyResult(rate_asymptotic=asym, rate_finite=fin,
                       modulation_variance=va0, group_count=k0)
