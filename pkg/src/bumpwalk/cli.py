"""Command line: ``run``, ``compare`` and ``plot``.

Exit codes: 0 ok, 2 configuration or input error, 3 plant fault.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import LAYERS, ConfigError, load_config
from .harness import apply_overrides, run_scenario
from .metrics import TelemetryError, compare_runs
from .plots import emit_overlay, emit_plots

EXIT_OK, EXIT_CONFIG, EXIT_FAULT = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bumpwalk",
        description="Simulate biped walks with online foot adaptation, then compare and plot runs.",
        epilog="exit codes: 0 ok, 2 configuration or input error, 3 plant fault",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario config")
    run.add_argument("config", type=Path)
    run.add_argument("--enable", action="append", default=[], choices=LAYERS, metavar="LAYER",
                     help=f"switch a controller layer on ({', '.join(LAYERS)}); repeatable")
    run.add_argument("--disable", action="append", default=[], choices=LAYERS, metavar="LAYER",
                     help="switch a controller layer off; repeatable")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", type=Path, default=Path("runs"), help="output directory (default: runs)")
    run.add_argument("--name", help="output file stem")
    run.add_argument("--no-plots", action="store_true", help="skip the PNG figures")

    cmp_ = sub.add_parser("compare", help="metric differences b - a between two runs")
    cmp_.add_argument("a", type=Path)
    cmp_.add_argument("b", type=Path)
    cmp_.add_argument("--json", action="store_true", help="machine-readable output")

    plot = sub.add_parser("plot", help="render figures from a telemetry CSV")
    plot.add_argument("csv", type=Path)
    plot.add_argument("--overlay", type=Path, help="second run drawn on the same figure")
    plot.add_argument("--out", type=Path, help="directory for the figures (default: next to the CSV)")
    return p


def _run(args) -> int:
    scenario = apply_overrides(load_config(args.config), args.enable, args.disable, args.seed)
    result, metrics = run_scenario(scenario, args.out, name=args.name, plots=not args.no_plots)
    if result.fault is not None:
        print(f"plant fault at tick {result.fault.tick}: {result.fault}", file=sys.stderr)
        print(result.csv_path)
        return EXIT_FAULT
    print(result.csv_path)
    print(f"{result.n_ticks} ticks, {result.wall_time:.2f} s, mean speed {metrics.mean_speed:.4f} m/s")
    return EXIT_OK


def _compare(args) -> int:
    diff = compare_runs(args.a, args.b)
    if args.json:
        print(json.dumps(diff.to_dict(), indent=2, sort_keys=True))
    else:
        print(diff.format_table())
    return EXIT_OK


def _plot(args) -> int:
    if args.overlay is not None:
        out = None if args.out is None else args.out / f"{args.csv.stem}_vs_{args.overlay.stem}_forces.png"
        if out is not None:
            out.parent.mkdir(parents=True, exist_ok=True)
        print(emit_overlay(args.csv, args.overlay, out))
    else:
        for path in emit_plots(args.csv, args.out):
            print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _run, "compare": _compare, "plot": _plot}[args.command]
    try:
        return handler(args)
    except (ConfigError, TelemetryError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
