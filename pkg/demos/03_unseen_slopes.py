#!/usr/bin/env python3
"""Cross the 7 and 12 degree wedges the planner knows nothing about.

Runs the course three ways: calibrated orientation gains, the same with the
orientation layer switched off, and the unscaled hardware coefficients. For
each run it reports how far the sole stayed from the slope while a foot was
fully on a wedge, and how much the ankle offset moved there compared to
elsewhere.
"""
import sys
from pathlib import Path

import numpy as np

from bumpwalk.config import load_config
from bumpwalk.harness import apply_overrides, simulate
from bumpwalk.metrics import compute_metrics, read_telemetry

root = Path(__file__).resolve().parents[1]
out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)

calibrated = load_config(root / "configs" / "inclined_obstacles.toml")
runs = {
    "calibrated": calibrated,
    "no orientation": apply_overrides(calibrated, disable=["orientation"]),
    "hardware gains": load_config(root / "configs" / "inclined_obstacles_hardware.toml"),
}

for label, scenario in runs.items():
    result = simulate(scenario, out / f"slopes_{label.replace(' ', '_')}.csv")
    metrics = compute_metrics(result.csv_path)
    tel = read_telemetry(result.csv_path)
    print(f"== {label}: {'fault ' + str(result.fault) if result.fault else 'completed'}, "
          f"mean speed {metrics.mean_speed:.4f} m/s")
    for ep in metrics.settle:
        slope = scenario.terrain.patches[ep["patch"]].pitch_deg
        settle = "never" if ep["settle_time"] is None else f"{ep['settle_time']:.3f} s"
        print(f"   {ep['side']} foot on {slope:4.1f} deg for {ep['duration']:.2f} s: "
              f"peak error {ep['peak_error_deg']:5.2f} deg, below 2 deg after {settle}")
    for tag in ("l", "r"):
        over = tel[f"{tag}_patch_over"] >= 0
        dth = np.abs(tel[f"{tag}_dth_pitch"])
        print(f"   {tag} |pitch offset| mean on wedges {dth[over].mean():.2e} rad, "
              f"elsewhere {dth[~over].mean():.2e} rad")
