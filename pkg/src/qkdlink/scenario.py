"""Scenario configuration, sweep execution and plot-data emission.

A scenario is a YAML tree: link-level defaults plus sweep axes (altitude, AO
radial orders, turbulence profile, background-noise mode).  Each sweep point
runs the full pipeline — pass segmentation, per-segment integrated turbulence,
AO error budget, coupling statistics, per-segment PDTE, pass merge, then DV
and/or CV key-rate optimization — and appends one CSV row.  Per-point failures
are recorded in a status column and the sweep continues.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from . import ao as ao_mod
from . import cvqkd, dvqkd, orbit, pdte
from .profiles import PROFILE_TARGETS, builtin_profile
from .turbulence import TurbulenceProfile, integrated_params, load_profile

DV_NOISE_MODES = ("sky_night", "sky_day", "glare")


@dataclass(frozen=True)
class LinkCommon:
    wavelength_m: float = 1550e-9
    pointing_std_rad: float = 1e-6
    divergence_rad: float = 10e-6
    eta_opt_db: float = 2.8
    tau_zenith: float = 0.91
    symbol_rate_hz: float = 100e6
    rx_diameter_m: float = 1.5

    @property
    def eta_opt(self) -> float:
        return 10.0 ** (-self.eta_opt_db / 10.0)


@dataclass
class Scenario:
    name: str
    common: LinkCommon
    min_elevation_deg: float
    segment_count: int
    ao_config: ao_mod.AOConfig
    altitudes_km: list[float]
    ao_orders: list[int]
    profile_names: list[str]
    profiles: dict[str, TurbulenceProfile]
    noise_modes: list[str]
    dv: dvqkd.DVParams | None
    cv: cvqkd.CVParams | None
    coupling_table: ao_mod.CouplingTable | None = None
    max_dv_groups: int = 10
    max_cv_groups: int = 12

    def points(self) -> list[tuple[str, float, int, str]]:
        """Sweep points in fixed row order (profile, altitude, orders, noise)."""
        return [(prof, alt, orders, noise)
                for prof in self.profile_names
                for alt in self.altitudes_km
                for orders in self.ao_orders
                for noise in self.noise_modes]


def _num(tree: dict, key: str, default, diags: list, context: str):
    if key not in tree:
        return default
    try:
        return float(tree[key])
    except (TypeError, ValueError):
        diags.append(f"{context}.{key}: expected a number, got {tree[key]!r}")
        return default


def _num_list(tree: dict, key: str, default, diags: list, context: str):
    if key not in tree:
        return list(default)
    raw = tree[key]
    if not isinstance(raw, list) or not raw:
        diags.append(f"{context}.{key}: expected a non-empty list")
        return list(default)
    out = []
    for v in raw:
        try:
            out.append(float(v))
        except (TypeError, ValueError):
            diags.append(f"{context}.{key}: non-numeric entry {v!r}")
    return out or list(default)


def load_config(path: str | Path) -> tuple[Scenario | None, list[str]]:
    """Parse and validate a scenario file.

    Returns (scenario, diagnostics).  All violations are collected; the
    scenario is None whenever any diagnostic was raised.
    """
    path = Path(path)
    diags: list[str] = []
    if not path.exists():
        return None, [f"config file not found: {path}"]
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        return None, [f"config parse error: {exc}"]
    if not isinstance(tree, dict):
        return None, ["config root must be a mapping"]

    name = str(tree.get("name", path.stem))
    c = tree.get("common", {}) or {}
    common = LinkCommon(
        wavelength_m=_num(c, "wavelength_m", 1550e-9, diags, "common"),
        pointing_std_rad=_num(c, "pointing_std_rad", 1e-6, diags, "common"),
        divergence_rad=_num(c, "divergence_rad", 10e-6, diags, "common"),
        eta_opt_db=_num(c, "eta_opt_db", 2.8, diags, "common"),
        tau_zenith=_num(c, "tau_zenith", 0.91, diags, "common"),
        symbol_rate_hz=_num(c, "symbol_rate_hz", 100e6, diags, "common"),
        rx_diameter_m=_num(c, "rx_diameter_m", 1.5, diags, "common"),
    )
    for fname in ("wavelength_m", "divergence_rad", "tau_zenith",
                  "symbol_rate_hz", "rx_diameter_m"):
        if getattr(common, fname) <= 0:
            diags.append(f"common.{fname}: must be positive")
    if not 0 < common.tau_zenith <= 1:
        diags.append("common.tau_zenith: must be in (0, 1]")

    o = tree.get("orbit", {}) or {}
    min_elev = _num(o, "min_elevation_deg", 20.0, diags, "orbit")
    segment_count = int(_num(o, "segment_count", 9, diags, "orbit"))
    if not 0 < min_elev < 90:
        diags.append("orbit.min_elevation_deg: must be in (0, 90)")
    if segment_count < 1:
        diags.append("orbit.segment_count: must be >= 1")

    a = tree.get("ao", {}) or {}
    try:
        ao_config = ao_mod.AOConfig(
            corrected_radial_orders=int(_num(a, "corrected_radial_orders", 15,
                                             diags, "ao")),
            aperture_diameter_m=common.rx_diameter_m,
            sampling_frequency_hz=_num(a, "sampling_frequency_hz", 5000.0,
                                       diags, "ao"),
            frame_delay=_num(a, "frame_delay", 2.0, diags, "ao"),
        )
    except ValueError as exc:
        diags.append(f"ao: {exc}")
        ao_config = ao_mod.AOConfig(aperture_diameter_m=common.rx_diameter_m)
    coupling_table = None
    if a.get("coupling_table"):
        tbl_path = Path(a["coupling_table"])
        if not tbl_path.is_absolute():
            tbl_path = path.parent / tbl_path
        if not tbl_path.exists():
            diags.append(f"ao.coupling_table: file not found: {tbl_path}")
        else:
            try:
                coupling_table = ao_mod.CouplingTable.from_file(tbl_path)
            except ValueError as exc:
                diags.append(f"ao.coupling_table: {exc}")

    sweep = tree.get("sweep", {}) or {}
    altitudes = _num_list(sweep, "altitudes_km", [500.0], diags, "sweep")
    if any(alt <= 0 for alt in altitudes):
        diags.append("sweep.altitudes_km: altitudes must be positive")
    orders = [int(v) for v in
              _num_list(sweep, "ao_orders",
                        [ao_config.corrected_radial_orders], diags, "sweep")]
    if any(v < 0 for v in orders):
        diags.append("sweep.ao_orders: orders must be >= 0")
    profile_names = sweep.get("profiles", tree.get("profile", "D1"))
    if isinstance(profile_names, str):
        profile_names = [profile_names]

    profiles: dict[str, TurbulenceProfile] = {}
    for pname in profile_names:
        pname = str(pname)
        if pname in PROFILE_TARGETS:
            profiles[pname] = builtin_profile(pname)
            continue
        ppath = Path(pname)
        if not ppath.is_absolute():
            ppath = path.parent / ppath
        if not ppath.exists():
            diags.append(f"profile file not found: {pname}")
            continue
        try:
            profiles[pname] = load_profile(ppath)
        except ValueError as exc:
            diags.append(f"profile {pname}: {exc}")
    profile_names = [str(p) for p in profile_names]

    dv_params = None
    noise_modes = ["sky_night"]
    if "dv" in tree:
        d = tree["dv"] or {}
        modes = d.get("noise_modes", d.get("noise_mode", "sky_night"))
        if isinstance(modes, str):
            modes = [modes]
        noise_modes = [str(m) for m in modes]
        for m in noise_modes:
            if m not in DV_NOISE_MODES:
                diags.append(f"dv.noise_modes: unknown mode {m!r}; "
                             f"expected one of {DV_NOISE_MODES}")
        try:
            dv_params = dvqkd.DVParams(
                mu=_num(d, "mu", 0.5, diags, "dv"),
                nu=_num(d, "nu", 0.1, diags, "dv"),
                p_mu=_num(d, "p_mu", 0.7, diags, "dv"),
                p_nu=_num(d, "p_nu", 0.2, diags, "dv"),
                q=_num(d, "q", 0.9, diags, "dv"),
                eta_d=_num(d, "eta_d", 0.85, diags, "dv"),
                e_d=_num(d, "e_d", 0.01, diags, "dv"),
                eps_sec=_num(d, "eps_sec", 1e-10, diags, "dv"),
                eps_cor=_num(d, "eps_cor", 1e-10, diags, "dv"),
                f_ec=_num(d, "f_ec", 1.16, diags, "dv"),
                rep_rate_hz=common.symbol_rate_hz,
            )
        except ValueError as exc:
            diags.append(f"dv: {exc}")

    cv_params = None
    if "cv" in tree:
        v = tree["cv"] or {}
        try:
            cv_params = cvqkd.CVParams(
                modulation_variance=_num(v, "modulation_variance", 5.0,
                                         diags, "cv"),
                beta=_num(v, "beta", 0.95, diags, "cv"),
                eta=_num(v, "eta", 0.4, diags, "cv"),
                v_el=_num(v, "v_el", 0.1, diags, "cv"),
                xi_fix=_num(v, "xi_fix", 0.01, diags, "cv"),
                pilot_energy_j=_num(v, "pilot_energy_j", 10e-12, diags, "cv"),
                pilot_drift_hz=_num(v, "pilot_drift_hz", 10e3, diags, "cv"),
                symbol_rate_hz=common.symbol_rate_hz,
                wavelength_m=common.wavelength_m,
                eps_pe=_num(v, "eps_pe", 1e-10, diags, "cv"),
            )
        except ValueError as exc:
            diags.append(f"cv: {exc}")

    if "dv" not in tree and "cv" not in tree:
        diags.append("at least one of the dv / cv sections is required")

    if diags:
        return None, diags
    return Scenario(
        name=name, common=common, min_elevation_deg=min_elev,
        segment_count=segment_count, ao_config=ao_config,
        altitudes_km=altitudes, ao_orders=orders,
        profile_names=profile_names, profiles=profiles,
        noise_modes=noise_modes, dv=dv_params, cv=cv_params,
        coupling_table=coupling_table,
        max_dv_groups=int(_num(tree.get("dv", {}) or {}, "max_groups", 10,
                               diags, "dv")),
        max_cv_groups=int(_num(tree.get("cv", {}) or {}, "max_groups", 12,
                               diags, "cv")),
    ), []


def pass_pdte(scenario: Scenario, profile: TurbulenceProfile,
              altitude_km: float,
              radial_orders: int) -> tuple[pdte.TransmittanceDistribution, float]:
    """PDTE of one full pass and the pass duration in seconds."""
    cfg = orbit.OrbitConfig(altitude_km=altitude_km,
                            min_elevation_deg=scenario.min_elevation_deg,
                            segment_count=scenario.segment_count)
    segments = orbit.segment_pass(cfg)
    common = scenario.common
    ao_cfg = ao_mod.AOConfig(
        corrected_radial_orders=radial_orders,
        aperture_diameter_m=common.rx_diameter_m,
        sampling_frequency_hz=scenario.ao_config.sampling_frequency_hz,
        frame_delay=scenario.ao_config.frame_delay,
    )
    parts = []
    for seg in segments:
        params = integrated_params(profile, seg.elevation_deg,
                                   common.wavelength_m, seg.slew_rate_rad_s)
        if scenario.coupling_table is not None:
            coupling = scenario.coupling_table.lookup(seg.elevation_deg)
        else:
            budget = ao_mod.error_budget(ao_cfg, params)
            coupling = ao_mod.coupling_stats(budget, params.sigma_chi2,
                                             ao_cfg)
        geo = pdte.geometric_pdte(pdte.GeometricLossParams(
            divergence_rad=common.divergence_rad,
            pointing_std_rad=common.pointing_std_rad,
            aperture_radius_m=common.rx_diameter_m / 2.0,
            slant_range_m=seg.slant_range_m))
        tau_atm = pdte.atmospheric_transmittance(common.tau_zenith,
                                                 seg.zenith_angle_deg)
        parts.append((seg, pdte.segment_pdte(seg, geo, coupling, tau_atm,
                                             common.eta_opt)))
    return pdte.merge_pass(parts), orbit.pass_duration(cfg)


RESULT_COLUMNS = [
    "scenario", "profile", "altitude_km", "ao_orders", "noise_mode", "status",
    "mean_attenuation_db", "pass_duration_s", "n_symbols",
    "dv_rate_asym", "dv_rate_finite", "dv_mu", "dv_nu", "dv_p_mu", "dv_p_nu",
    "dv_q", "dv_groups",
    "cv_rate_asym", "cv_rate_finite", "cv_V_A", "cv_xi_fix", "cv_groups",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.8e}"
    return str(x)


def evaluate_point(scenario: Scenario, profile_name: str, altitude_km: float,
                   radial_orders: int, noise_mode: str) -> dict:
    row = {k: None for k in RESULT_COLUMNS}
    row.update(scenario=scenario.name, profile=profile_name,
               altitude_km=altitude_km, ao_orders=radial_orders,
               noise_mode=noise_mode, status="ok")
    try:
        profile = scenario.profiles[profile_name]
        dist, duration = pass_pdte(scenario, profile, altitude_km,
                                   radial_orders)
        n_symbols = scenario.common.symbol_rate_hz * duration
        row.update(mean_attenuation_db=dist.mean_attenuation_db(),
                   pass_duration_s=duration, n_symbols=n_symbols)
        if scenario.dv is not None:
            y0 = dvqkd.background_yield(
                noise_mode,
                telescope_diameter_m=scenario.common.rx_diameter_m,
                eta_opt=scenario.common.eta_opt,
                eta_d=scenario.dv.eta_d)
            params = replace(scenario.dv, y0=y0,
                             n_pulses=n_symbols)
            res = dvqkd.optimize_dv(params, dist, n_symbols,
                                    group_range=(1, scenario.max_dv_groups))
            row.update(dv_rate_asym=res.rate_asymptotic,
                       dv_rate_finite=res.rate_finite, dv_mu=res.mu,
                       dv_nu=res.nu, dv_p_mu=res.p_mu, dv_p_nu=res.p_nu,
                       dv_q=res.q, dv_groups=res.group_count)
        if scenario.cv is not None:
            res = cvqkd.optimize_cv(scenario.cv, dist, n_symbols,
                                    max_groups=scenario.max_cv_groups)
            row.update(cv_rate_asym=res.rate_asymptotic,
                       cv_rate_finite=res.rate_finite,
                       cv_V_A=res.modulation_variance,
                       cv_xi_fix=scenario.cv.xi_fix,
                       cv_groups=res.group_count)
    except Exception as exc:  # per-point failure: record and continue
        row["status"] = f"error: {exc}"
    return row


def run_scenario(scenario: Scenario, out_path: str | Path,
                 threads: int = 1) -> int:
    """Run the sweep and write the result table.  Returns the error count."""
    points = scenario.points()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda p: evaluate_point(scenario, *p), points))
    else:
        rows = [evaluate_point(scenario, *p) for p in points]
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in RESULT_COLUMNS])
    return sum(1 for r in rows if r["status"] != "ok")


PLOT_FAMILIES = {
    "rate_vs_altitude": ("altitude_km", ("profile", "noise_mode")),
    "rate_vs_orders": ("ao_orders", ("profile", "noise_mode")),
    "attenuation_vs_altitude": ("altitude_km", ("profile",)),
    "attenuation_vs_orders": ("ao_orders", ("profile",)),
}


def emit_plot_data(results_path: str | Path, family: str,
                   out_dir: str | Path) -> list[Path]:
    """Split a result table into per-curve CSV files plus a gnuplot script."""
    if family not in PLOT_FAMILIES:
        raise ValueError(f"unknown figure family {family!r}; known families: "
                         + ", ".join(sorted(PLOT_FAMILIES)))
    with open(results_path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
    if not rows:
        raise ValueError(f"no usable rows in {results_path}")
    x_col, key_cols = PLOT_FAMILIES[family]
    y_cols = ["mean_attenuation_db"] if family.startswith("attenuation") else \
        ["dv_rate_asym", "dv_rate_finite", "cv_rate_asym", "cv_rate_finite"]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    curves: dict[tuple, list] = {}
    for row in rows:
        for y_col in y_cols:
            if not row.get(y_col):
                continue
            key = tuple(row[c] for c in key_cols) + (y_col,)
            curves.setdefault(key, []).append(
                (float(row[x_col]), float(row[y_col])))
    for key, pts in sorted(curves.items()):
        pts.sort()
        fname = out_dir / (family + "_" + "_".join(str(k) for k in key)
                           + ".csv")
        with open(fname, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([x_col, key[-1]])
            writer.writerows([(f"{x:g}", f"{y:.8e}") for x, y in pts])
        written.append(fname)
    script = out_dir / f"{family}.gp"
    logscale = "" if family.startswith("attenuation") else "set logscale y\n"
    plots = ", \\\n  ".join(
        f'"{p.name}" using 1:2 with linespoints title "{p.stem}"'
        for p in written)
    script.write_text(
        "set datafile separator comma\n"
        f'set xlabel "{x_col}"\nset key outside\n{logscale}'
        f"plot {plots}\n")
    written.append(script)
    return written
