"""Probability distribution of the channel transmission efficiency (PDTE).

All distributions live on a shared grid, uniform in log10(transmittance) from
-80 dB to 0 dB, storing the probability mass per bin.  Per-segment
distributions combine geometric loss (log-negative Weibull beam-wander model),
truncated-Gaussian fiber-coupling statistics, atmospheric extinction and fixed
optics loss; segment distributions are merged into the pass distribution by
dwell-time weights and can be partitioned into equal-mass groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import i0e, i1e
from scipy.stats import norm

from .ao import CouplingStats
from .kernels import product_mix
from .orbit import PassSegment

GRID_SIZE = 2048
LOG10_MIN = -8.0  # -80 dB

_LOG_EDGES = np.linspace(LOG10_MIN, 0.0, GRID_SIZE + 1)
_LOG_CENTERS = 0.5 * (_LOG_EDGES[:-1] + _LOG_EDGES[1:])
_DLOG = _LOG_EDGES[1] - _LOG_EDGES[0]
GRID = 10.0 ** _LOG_CENTERS


@dataclass(frozen=True)
class TransmittanceDistribution:
    grid: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        p = np.ascontiguousarray(self.probabilities, dtype=float)
        if g.shape != p.shape:
            raise ValueError("grid and probabilities must match in shape")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if g[0] <= 0 or g[-1] > 1.0 + 1e-12:
            raise ValueError("grid must lie in (0, 1]")
        if np.any(p < -1e-15):
            raise ValueError("probabilities must be non-negative")
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "probabilities", np.clip(p, 0.0, None))

    def mean(self) -> float:
        """Mean transmission efficiency E[eta]."""
        return float(np.dot(self.grid, self.probabilities))

    def mean_transmission_coeff(self) -> float:
        """Mean transmission coefficient E[T] with T = sqrt(eta)."""
        return float(np.dot(np.sqrt(self.grid), self.probabilities))

    def var_transmission_coeff(self) -> float:
        t = np.sqrt(self.grid)
        m = float(np.dot(t, self.probabilities))
        return max(0.0, float(np.dot(t * t, self.probabilities)) - m * m)

    def mean_attenuation_db(self) -> float:
        return -10.0 * math.log10(self.mean())


@dataclass(frozen=True)
class TransmittanceGroup:
    lower: float
    upper: float
    probability_mass: float
    mean_T: float
    var_T: float


@dataclass(frozen=True)
class GeometricLossParams:
    """Beam divergence/pointing geometry for one fixed-distance segment."""
    divergence_rad: float = 10e-6
    pointing_std_rad: float = 1e-6
    aperture_radius_m: float = 0.75
    slant_range_m: float = 500e3

    def __post_init__(self):
        for name in ("divergence_rad", "pointing_std_rad",
                     "aperture_radius_m", "slant_range_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def footprint_radius_m(self) -> float:
        return self.divergence_rad * self.slant_range_m

    @property
    def offset_std_m(self) -> float:
        return self.pointing_std_rad * self.slant_range_m


def atmospheric_transmittance(tau_zenith: float, zenith_angle_deg: float) -> float:
    """Extinction through the atmosphere at a slant angle."""
    return tau_zenith ** (1.0 / math.cos(math.radians(zenith_angle_deg)))


def weibull_parameters(aperture_radius_m: float,
                       footprint_radius_m: float) -> tuple[float, float, float]:
    """(eta0, shape, scale) of the beam-truncation transmittance law.

    A Gaussian footprint of radius w truncated by a circular aperture of
    radius a transmits eta(r) = eta0 * exp(-(r/scale)^shape) for a centroid
    offset r; eta0 = 1 - exp(-2 a^2 / w^2).
    """
    a, w = aperture_radius_m, footprint_radius_m
    if w <= 0:
        raise ValueError("footprint radius must be positive")
    x = 4.0 * a * a / (w * w)
    eta0 = -math.expm1(-x / 2.0)
    t0 = float(i0e(x))
    t1 = float(i1e(x))
    log_term = math.log(2.0 * eta0 / (1.0 - t0))
    shape = 2.0 * x * (t1 / (1.0 - t0)) / log_term
    scale = a * log_term ** (-1.0 / shape)
    return eta0, shape, scale


def geometric_transmittance_cdf(eta: np.ndarray,
                                p: GeometricLossParams) -> np.ndarray:
    """Closed-form CDF of the log-negative Weibull transmittance."""
    eta0, shape, scale = weibull_parameters(p.aperture_radius_m,
                                            p.footprint_radius_m)
    eta = np.asarray(eta, dtype=float)
    cdf = np.ones_like(eta)
    below = eta < eta0
    with np.errstate(divide="ignore"):
        r = scale * np.log(eta0 / np.clip(eta[below], 1e-300, None)) ** (1.0 / shape)
    sigma = p.offset_std_m
    cdf[below] = np.exp(-r * r / (2.0 * sigma * sigma))
    return cdf


def geometric_pdte(p: GeometricLossParams,
                   grid_size: int = GRID_SIZE) -> TransmittanceDistribution:
    """Discretized geometric-loss transmittance distribution on the shared grid."""
    if grid_size != GRID_SIZE:
        edges = 10.0 ** np.linspace(LOG10_MIN, 0.0, grid_size + 1)
        grid = np.sqrt(edges[:-1] * edges[1:])
    else:
        edges = 10.0 ** _LOG_EDGES
        grid = GRID
    eta0, _, _ = weibull_parameters(p.aperture_radius_m, p.footprint_radius_m)
    if p.offset_std_m / p.footprint_radius_m < 1e-9:
        # negligible pointing jitter: point mass at the on-axis transmittance
        probs = np.zeros(grid.size)
        probs[np.searchsorted(edges, eta0) - 1] = 1.0
    else:
        cdf = geometric_transmittance_cdf(edges, p)
        probs = np.diff(cdf)
        probs[0] += cdf[0]  # lump the sub-grid tail into the lowest bin
    return TransmittanceDistribution(grid, probs / probs.sum())


def discretize_coupling(stats: CouplingStats, upper: float = 1.0,
                        points: int = 257) -> tuple[np.ndarray, np.ndarray]:
    """Truncated-Gaussian coupling efficiency as discrete (value, mass) atoms."""
    mean, std = stats.mean, stats.std_dev
    if std <= 0:
        return (np.array([min(max(mean, 1e-12), upper)]), np.array([1.0]))
    lo = max(1e-9, mean - 6.0 * std)
    hi = min(upper, mean + 6.0 * std)
    if hi <= lo:
        return (np.array([hi]), np.array([1.0]))
    edges = np.linspace(lo, hi, points + 1)
    cdf = norm.cdf(edges, loc=mean, scale=std)
    mass = np.diff(cdf)
    mass[0] += norm.cdf(lo, loc=mean, scale=std) - norm.cdf(0.0, loc=mean, scale=std)
    mass[-1] += norm.sf(hi, loc=mean, scale=std)
    values = 0.5 * (edges[:-1] + edges[1:])
    return values, mass / mass.sum()


def segment_pdte(segment: PassSegment, geo: TransmittanceDistribution,
                 coupling: CouplingStats, tau_atm: float, eta_opt: float,
                 coupling_upper: float = 1.0) -> TransmittanceDistribution:
    """Distribution of eta_geo * eta_coupling * tau_atm * eta_opt.

    Geometric loss and coupling are independent; the product is accumulated in
    log-transmittance on the shared grid.
    """
    c_vals, c_mass = discretize_coupling(coupling, upper=coupling_upper)
    shift = math.log10(tau_atm * eta_opt)
    probs = product_mix(
        np.ascontiguousarray(np.log10(geo.grid)),
        np.ascontiguousarray(geo.probabilities),
        np.ascontiguousarray(np.log10(c_vals)),
        np.ascontiguousarray(c_mass),
        shift, float(_LOG_EDGES[0] + 0.5 * _DLOG), float(_DLOG), GRID_SIZE)
    return TransmittanceDistribution(GRID, probs / probs.sum())


def merge_pass(parts: list[tuple[PassSegment, TransmittanceDistribution]]
               ) -> TransmittanceDistribution:
    """Dwell-time-weighted mixture of segment distributions."""
    if not parts:
        raise ValueError("no segments to merge")
    grid = parts[0][1].grid
    total_weight = sum(seg.weight for seg, _ in parts)
    probs = np.zeros(grid.size)
    for seg, dist in parts:
        if dist.grid.shape != grid.shape or not np.allclose(dist.grid, grid):
            raise ValueError("segment distributions must share a common grid")
        probs += (seg.weight / total_weight) * dist.probabilities
    return TransmittanceDistribution(grid, probs / probs.sum())


def partition_weights(dist: TransmittanceDistribution, k: int) -> list[np.ndarray]:
    """Per-group bin weights for a k-way equal-mass quantile partition.

    Each returned vector has the shape of the grid and sums to 1/k; bins
    straddling a quantile boundary are split fractionally between the two
    adjacent groups, so mass-weighted expectations recombine exactly.
    """
    if k < 1:
        raise ValueError("group count must be >= 1")
    p = dist.probabilities
    cum_hi = np.cumsum(p)
    cum_hi /= cum_hi[-1]
    cum_lo = cum_hi - p
    weights = []
    for g in range(k):
        lo, hi = g / k, (g + 1) / k
        w = np.clip(np.minimum(cum_hi, hi) - np.maximum(cum_lo, lo), 0.0, None)
        weights.append(w)
    return weights


def partition_groups(dist: TransmittanceDistribution,
                     k: int) -> list[TransmittanceGroup]:
    """Equal-mass quantile groups with per-group statistics of T = sqrt(eta)."""
    t = np.sqrt(dist.grid)
    groups = []
    for w in partition_weights(dist, k):
        mass = float(w.sum())
        support = np.nonzero(w)[0]
        lower = float(dist.grid[support[0]]) if support.size else 0.0
        upper = float(dist.grid[support[-1]]) if support.size else 0.0
        mean_t = float(np.dot(w, t)) / mass if mass > 0 else 0.0
        var_t = max(0.0, float(np.dot(w, t * t)) / mass - mean_t**2) \
            if mass > 0 else 0.0
        groups.append(TransmittanceGroup(lower=lower, upper=upper,
                                         probability_mass=mass,
                                         mean_T=mean_t, var_T=var_t))
    return groups


def export_csv(dist: TransmittanceDistribution, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("transmittance,probability\n")
        for g, p in zip(dist.grid, dist.probabilities):
            fh.write(f"{g:.12e},{p:.12e}\n")


def import_csv(path: str | Path) -> TransmittanceDistribution:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return TransmittanceDistribution(data[:, 0],
                                     data[:, 1] / data[:, 1].sum())
