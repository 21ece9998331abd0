"""Command-line entry point.

Verbs:
  run <config>       execute the sweep, write results.csv to the output dir
  validate <config>  parse the config and report all diagnostics
  plot <results> <family>  emit per-curve CSV files and a gnuplot script
  pdte <config>      emit the pass PDTE for every sweep point, no key rates

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import pdte as pdte_mod
from . import scenario as scn

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdlink",
        description="Satellite-to-ground QKD link-budget simulator")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed (sampling utilities only; the "
                        "production pipeline is deterministic)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweep evaluation")
    parser.add_argument("--out-dir", default=".",
                        help="directory for emitted files")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario sweep")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="validate a scenario config")
    p_val.add_argument("config")
    p_plot = sub.add_parser("plot", help="emit plot-ready curve data")
    p_plot.add_argument("results")
    p_plot.add_argument("family")
    p_pdte = sub.add_parser("pdte", help="emit pass PDTEs only")
    p_pdte.add_argument("config")
    return parser


def _load(config_path: str):
    scenario, diags = scn.load_config(config_path)
    for d in diags:
        print(f"config error: {d}", file=sys.stderr)
    return scenario


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    np.random.seed(args.seed)
    out_dir = Path(args.out_dir)

    if args.verb == "validate":
        scenario = _load(args.config)
        if scenario is None:
            return EXIT_CONFIG
        print(f"{args.config}: ok ({len(scenario.points())} sweep points)")
        return EXIT_OK

    if args.verb == "run":
        scenario = _load(args.config)
        if scenario is None:
            return EXIT_CONFIG
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / "results.csv"
        try:
            failures = scn.run_scenario(scenario, out_path,
                                        threads=args.threads)
        except Exception as exc:
            print(f"runtime failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {out_path} ({len(scenario.points())} points, "
              f"{failures} failed)")
        return EXIT_OK

    if args.verb == "plot":
        try:
            files = scn.emit_plot_data(args.results, args.family, out_dir)
        except FileNotFoundError:
            print(f"results file not found: {args.results}", file=sys.stderr)
            return EXIT_CONFIG
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
        print("\n".join(str(f) for f in files))
        return EXIT_OK

    if args.verb == "pdte":
        scenario = _load(args.config)
        if scenario is None:
            return EXIT_CONFIG
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            for prof, alt, orders, _noise in scenario.points():
                dist, _ = scn.pass_pdte(scenario, scenario.profiles[prof],
                                        alt, orders)
                name = f"pdte_{prof}_{alt:g}km_{orders}orders.csv"
                pdte_mod.export_csv(dist, out_dir / name)
                print(out_dir / name)
        except Exception as exc:
            print(f"runtime failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK

    return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
