"""Closed-loop runs: planner -> adaptation layers -> plant at the control rate, with CSV telemetry.

Per tick: sample the plan, read sensors from the previous plant state, run the
layers (distributor, force, bump, orientation, ZMP-CoM, compose), advance the
plant by its substeps, log one row. Sensor data is therefore one tick old.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import LAYERS, Scenario
from .controllers import AdaptationLoop, average_distance
from .gait import LEFT, RIGHT
from .planner import WalkPlan, plan_walk
from .plant import (
    PlantFault,
    deflection_bias,
    foot_wrench,
    initial_state,
    measured_zmp,
    patch_status,
    read_bump_sensors,
    read_ft_sensor,
    sole_ground_pitch,
    step_plant,
)

log = logging.getLogger(__name__)

SCHEMA = "bumpwalk-telemetry/1"

_FOOT_COLUMNS = (
    "x", "z_d", "z_mod", "z_star", "z", "pitch_cmd", "roll_cmd", "pitch", "roll",
    "fz", "fz_peak", "fzd", "d_a", "d_b", "d_c", "d_d", "d_avg",
    "alpha_pitch", "alpha_roll", "true_pitch_err", "du", "dth_pitch", "dth_roll",
    "e_bump", "bump_on", "ori_on", "patch_full", "patch_over",
)
_INT_COLUMNS = {"step", "zmp_valid"} | {
    f"{tag}_{name}" for tag in ("l", "r") for name in ("bump_on", "ori_on", "patch_full", "patch_over")
}

COLUMNS = (
    ("t", "step", "mode", "s",
     "com_d_x", "com_d_y", "com_mod_x", "com_mod_y", "com_x", "com_y", "body_z",
     "zmp_d_x", "zmp_d_y", "zmp_m_x", "zmp_m_y", "zmp_valid", "dz", "e_force",
     "com_corr_x", "com_corr_y")
    + tuple(f"l_{c}" for c in _FOOT_COLUMNS)
    + tuple(f"r_{c}" for c in _FOOT_COLUMNS)
)


def _fmt(name: str, value) -> str:
    if name == "mode":
        return str(value)
    if name in _INT_COLUMNS:
        return str(int(value))
    v = float(value)
    if v == 0.0:
        v = 0.0  # no negative zero
    return f"{v:+.9e}"


@dataclass(frozen=True)
class TickRecord:
    """What one control tick saw and produced, for observers."""

    k: int
    state: object  # PlantState after the substeps
    corner_forces: list  # per substep, (2, 4)
    sub_poses: list  # per substep, (2, 5) world-frame foot poses
    wrench: np.ndarray  # F/T reading produced by this tick
    bump: np.ndarray  # readings consumed by this tick
    row: dict


@dataclass
class RunResult:
    csv_path: Path
    n_ticks: int
    wall_time: float
    fault: PlantFault | None = None


def apply_overrides(scenario: Scenario, enable=(), disable=(), seed: int | None = None) -> Scenario:
    layers = scenario.layers
    for name in enable:
        layers = layers.with_layer(name, True)
    for name in disable:
        layers = layers.with_layer(name, False)
    return replace(scenario, layers=layers, seed=scenario.seed if seed is None else seed)


def write_header(fh, scenario: Scenario) -> None:
    fh.write(f"# schema: {SCHEMA}\n")
    for key, value in scenario.header().items():
        fh.write(f"# {key}: {json.dumps(value)}\n")
    patches = [
        [p.x_start, p.x_end, p.height, p.pitch_deg, p.roll_deg] for p in scenario.terrain.patches
    ]
    fh.write(f"# patches: {json.dumps(patches)}\n")
    fh.write(",".join(COLUMNS) + "\n")


def simulate(scenario: Scenario, csv_path, plan: WalkPlan | None = None,
             observer=None) -> RunResult:
    """Run the closed loop and stream one CSV row per control tick.

    ``observer``, if given, is called with a :class:`TickRecord` after every
    logged tick.

    A :class:`PlantFault` stops the run; the rows logged so far are kept and
    the fault is returned in the result.
    """
    started = time.perf_counter()
    csv_path = Path(csv_path)
    dt = scenario.control.dt
    if plan is None:
        plan = plan_walk(scenario.gait, dt)
    pp, geom = scenario.plant, scenario.foot
    dt_sub = dt / pp.substeps
    rng = np.random.default_rng(scenario.seed)
    g = scenario.gait.gravity

    loop = AdaptationLoop(
        scenario.control, geom, scenario.layers, scenario.weight, scenario.zmp_com_gains
    )
    state = initial_state(
        plan.com_pos[0], plan.ankle_pos[0, :, :2], geom, scenario.weight, pp.contact_stiffness
    )
    wrench = foot_wrench(state.corner_force, state.sole_poses(), geom)
    zmp_last = plan.zmp_ref[0]
    fault = None
    n_rows = 0

    with csv_path.open("w", newline="") as fh:
        write_header(fh, scenario)
        for k in range(plan.n_samples):
            sample = plan.sample(k)
            bump = read_bump_sensors(state, terrain=scenario.terrain, geom=geom,
                                     noise=pp.bump_noise, rng=rng)
            poses = state.sole_poses()
            zmp_m, zmp_valid = measured_zmp(wrench, poses, last=zmp_last)
            if zmp_valid:
                zmp_last = zmp_m
            try:
                cmd, tel = loop.step(sample, bump, wrench, zmp_m, state.com)
                bias = deflection_bias(sample.phase, scenario.gait, pp.deflection)
                forces, sub_poses = [], []
                for _ in range(pp.substeps):
                    state = step_plant(state, cmd, scenario.terrain, pp, geom, dt_sub, bias, g)
                    forces.append(state.corner_force)
                    sub_poses.append(state.sole_poses())
            except (PlantFault, ValueError) as exc:
                fault = exc if isinstance(exc, PlantFault) else PlantFault(str(exc))
                fault.tick = k
                log.error("plant fault at tick %d: %s", k, exc)
                break
            wrench = read_ft_sensor(forces, sub_poses, geom, pp.ft_noise, rng)
            fz_peak = np.max([f.sum(axis=1) for f in forces], axis=0)

            poses = state.sole_poses()
            status = patch_status(scenario.terrain, state, geom)
            true_err = sole_ground_pitch(scenario.terrain, state)
            ph = sample.phase
            row = {
                "t": sample.t, "step": ph.step_index, "mode": ph.mode.value, "s": ph.s,
                "com_d_x": sample.com_pos[0], "com_d_y": sample.com_pos[1],
                "com_mod_x": cmd.com_mod[0], "com_mod_y": cmd.com_mod[1],
                "com_x": state.com[0], "com_y": state.com[1], "body_z": state.body_z,
                "zmp_d_x": sample.zmp_ref[0], "zmp_d_y": sample.zmp_ref[1],
                "zmp_m_x": zmp_m[0], "zmp_m_y": zmp_m[1], "zmp_valid": zmp_valid,
                "dz": tel["dz"], "e_force": tel["e_force"],
                "com_corr_x": tel["com_corr_x"], "com_corr_y": tel["com_corr_y"],
            }
            for side, tag in ((LEFT, "l"), (RIGHT, "r")):
                row.update({
                    f"{tag}_x": poses[side, 0],
                    f"{tag}_z_d": sample.ankle_pos[side, 2],
                    f"{tag}_z_mod": cmd.p_z_mod[side],
                    f"{tag}_z_star": cmd.p_z_star[side],
                    f"{tag}_z": poses[side, 2],
                    f"{tag}_pitch_cmd": cmd.theta_mod[side, 0],
                    f"{tag}_roll_cmd": cmd.theta_mod[side, 1],
                    f"{tag}_pitch": poses[side, 3],
                    f"{tag}_roll": poses[side, 4],
                    f"{tag}_fz": wrench[side, 2],
                    f"{tag}_fz_peak": fz_peak[side],
                    f"{tag}_fzd": tel[f"fzd_{tag}"],
                    f"{tag}_d_a": bump[side, 0], f"{tag}_d_b": bump[side, 1],
                    f"{tag}_d_c": bump[side, 2], f"{tag}_d_d": bump[side, 3],
                    f"{tag}_d_avg": average_distance(bump[side]),
                    f"{tag}_alpha_pitch": tel[f"alpha_pitch_{tag}"],
                    f"{tag}_alpha_roll": tel[f"alpha_roll_{tag}"],
                    f"{tag}_true_pitch_err": true_err[side],
                    f"{tag}_du": tel[f"du_{tag}"],
                    f"{tag}_dth_pitch": tel[f"dth_pitch_{tag}"],
                    f"{tag}_dth_roll": tel[f"dth_roll_{tag}"],
                    f"{tag}_e_bump": tel[f"e_bump_{tag}"],
                    f"{tag}_bump_on": tel[f"bump_on_{tag}"],
                    f"{tag}_ori_on": tel[f"ori_on_{tag}"],
                    f"{tag}_patch_full": status[side, 0],
                    f"{tag}_patch_over": status[side, 1],
                })
            fh.write(",".join(_fmt(c, row[c]) for c in COLUMNS) + "\n")
            n_rows += 1
            if observer is not None:
                observer(TickRecord(k, state, forces, sub_poses, wrench, bump, row))

    return RunResult(csv_path, n_rows, time.perf_counter() - started, fault)


def run_scenario(scenario: Scenario, out_dir, name: str | None = None, plots: bool = True):
    """Simulate, then write ``<name>.csv``, ``<name>_metrics.json`` and plots into ``out_dir``.

    Returns ``(RunResult, RunMetrics | None)``; metrics are skipped on a fault.
    """
    from .metrics import compute_metrics, write_metrics

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if name is None:
        off = [n for n in LAYERS if not getattr(scenario.layers, n)]
        name = scenario.id + ("" if not off else "_no_" + "_".join(off))
    result = simulate(scenario, out_dir / f"{name}.csv")
    if result.fault is not None:
        return result, None
    metrics = compute_metrics(result.csv_path)
    write_metrics(metrics, out_dir / f"{name}_metrics.json")
    if plots:
        from .plots import emit_plots

        emit_plots(result.csv_path, out_dir)
    log.info("%s: %d ticks in %.2f s", name, result.n_ticks, result.wall_time)
    return result, metrics
