#!/usr/bin/env python3
"""Plan four 25 cm steps and look at what the planner hands the controllers.

Prints the footholds, the steady forward CoM speed and how far the DCM runs
ahead of the ZMP, then saves a plot of the sagittal CoM, DCM and ZMP traces
and dumps the per-tick plan to CSV.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bumpwalk.gait import SIDES, GaitParams
from bumpwalk.planner import plan_walk, write_plan_csv

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)

params = GaitParams(n_steps=4)
plan = plan_walk(params)

print(f"omega = {params.omega:.4f} 1/s, SS {params.ss_duration:.2f} s, DS {params.ds_duration:.2f} s")
for k, hold in enumerate(plan.footsteps.footholds):
    print(f"step {k}: {SIDES[hold.side]:>5} foot to x = {hold.x:.3f}, y = {hold.y:+.3f}")

i, j = plan.step_start_tick(1), plan.step_start_tick(3)
speed = (plan.com_pos[j, 0] - plan.com_pos[i, 0]) / (plan.t[j] - plan.t[i])
print(f"steady CoM speed {speed:.4f} m/s ({speed * 3.6:.2f} km/h)")
lead = np.linalg.norm(plan.dcm - plan.zmp_ref, axis=1)
print(f"DCM-ZMP distance: max {lead.max():.4f} m, at the end {lead[-1]:.1e} m")

fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(plan.t, plan.zmp_ref[:, 0], label="ZMP reference")
ax.plot(plan.t, plan.dcm[:, 0], label="DCM")
ax.plot(plan.t, plan.com_pos[:, 0], label="CoM")
ax.set_xlabel("t [s]")
ax.set_ylabel("x [m]")
ax.legend()
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(out / "plan_sagittal.png", dpi=100)
print("wrote", out / "plan_sagittal.png", "and", write_plan_csv(plan, out / "plan.csv"))
