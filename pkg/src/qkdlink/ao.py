"""Adaptive-optics residual error budget and SMF coupling statistics.

The post-correction wavefront error is budgeted into fitting, aliasing and
temporal terms for a system correcting N Zernike radial orders with a delayed
control loop.  The budget, together with the scintillation variance, is mapped
to Gaussian statistics of the single-mode-fiber coupling efficiency via an
extended Marechal approximation.  Externally measured per-elevation coupling
tables can override the analytic model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .turbulence import IntegratedParams

# piston-removed Kolmogorov phase variance coefficient and the asymptotic
# residual after correcting J Zernike modes (0.2944 J^(-sqrt(3)/2))
_KOLMOGOROV_COEFF = 1.0299
_RESIDUAL_COEFF = 0.2944
_RESIDUAL_EXP = -math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class AOConfig:
    corrected_radial_orders: int
    aperture_diameter_m: float
    sampling_frequency_hz: float = 5000.0
    frame_delay: int = 2
    aperture_to_waist_ratio: float = 2.2
    aliasing_fraction: float = 0.35
    max_coupling: float = 0.81
    fluctuation_coeff: float = 0.05

    def __post_init__(self):
        if self.corrected_radial_orders < 0:
            raise ValueError("corrected_radial_orders must be >= 0")
        if not 0 <= self.max_coupling <= 1:
            raise ValueError("max_coupling must be in [0, 1]")
        if self.sampling_frequency_hz <= 0:
            raise ValueError("sampling_frequency must be positive")


@dataclass(frozen=True)
class AOErrorBudget:
    turbulent_phase: float  # rad^2, before correction
    fitting: float
    aliasing: float
    temporal: float

    @property
    def total_residual(self) -> float:
        return self.fitting + self.aliasing + self.temporal


@dataclass(frozen=True)
class CouplingStats:
    mean: float
    std_dev: float


def zernike_mode_count(radial_orders: int) -> int:
    """Cumulative number of Zernike modes up to a radial order."""
    n = radial_orders
    return (n + 1) * (n + 2) // 2


def turbulent_phase_variance(aperture_diameter_m: float, r0_m: float) -> float:
    return _KOLMOGOROV_COEFF * (aperture_diameter_m / r0_m) ** (5.0 / 3.0)


def fitting_error(aperture_diameter_m: float, r0_m: float,
                  radial_orders: int) -> float:
    """Residual phase variance left after correcting the given radial orders."""
    if radial_orders == 0:
        return turbulent_phase_variance(aperture_diameter_m, r0_m)
    j = zernike_mode_count(radial_orders)
    return _RESIDUAL_COEFF * j ** _RESIDUAL_EXP \
        * (aperture_diameter_m / r0_m) ** (5.0 / 3.0)


def temporal_error(tau0_s: float, sampling_frequency_hz: float,
                   frame_delay: int) -> float:
    lag = frame_delay / sampling_frequency_hz
    return (lag / tau0_s) ** (5.0 / 3.0)


def error_budget(cfg: AOConfig, params: IntegratedParams) -> AOErrorBudget:
    turbulent = turbulent_phase_variance(cfg.aperture_diameter_m, params.r0_m)
    if cfg.corrected_radial_orders == 0:
        # no correction: the full turbulent phase remains, no loop-induced terms
        return AOErrorBudget(turbulent, fitting=turbulent, aliasing=0.0, temporal=0.0)
    fitting = fitting_error(cfg.aperture_diameter_m, params.r0_m,
                            cfg.corrected_radial_orders)
    return AOErrorBudget(
        turbulent_phase=turbulent,
        fitting=fitting,
        aliasing=cfg.aliasing_fraction * fitting,
        temporal=temporal_error(params.tau0_s, cfg.sampling_frequency_hz,
                                cfg.frame_delay),
    )


def coupling_stats(budget: AOErrorBudget, sigma_chi2: float,
                   cfg: AOConfig) -> CouplingStats:
    """Gaussian SMF coupling statistics from the residual budget.

    Mean follows an extended Marechal law with the scintillation intensity
    variance (4 sigma_chi^2) added to the residual phase variance; the spread
    is a relative-fluctuation model with a configurable coefficient.
    """
    residual = budget.total_residual
    mean = cfg.max_coupling * math.exp(-(residual + 4.0 * sigma_chi2))
    std = mean * math.sqrt(2.0 * residual * cfg.fluctuation_coeff
                           + 4.0 * sigma_chi2)
    if mean < 0.01:
        warnings.warn(
            f"mean SMF coupling {mean:.2e} < 0.01: AO correction ineffective "
            "for this turbulence strength", stacklevel=2)
    return CouplingStats(mean=mean, std_dev=std)


class CouplingTable:
    """Per-elevation (mean, std) coupling statistics from a measurement file.

    File format: `elevation_deg mean std` per line, `#` comments; lookups
    interpolate linearly in elevation and clamp outside the tabulated range.
    """

    def __init__(self, elevations_deg, means, stds):
        order = np.argsort(elevations_deg)
        self.elevations_deg = np.asarray(elevations_deg, dtype=float)[order]
        self.means = np.asarray(means, dtype=float)[order]
        self.stds = np.asarray(stds, dtype=float)[order]
        if self.elevations_deg.size == 0:
            raise ValueError("empty coupling table")

    @classmethod
    def from_file(cls, path: str | Path) -> "CouplingTable":
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            rows.append([float(p) for p in parts])
        data = np.array(rows, dtype=float)
        return cls(data[:, 0], data[:, 1], data[:, 2])

    def lookup(self, elevation_deg: float) -> CouplingStats:
        mean = float(np.interp(elevation_deg, self.elevations_deg, self.means))
        std = float(np.interp(elevation_deg, self.elevations_deg, self.stds))
        return CouplingStats(mean=mean, std_dev=std)
