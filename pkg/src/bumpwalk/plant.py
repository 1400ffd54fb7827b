"""Desk-scale biped plant.

Feet and the horizontal CoM follow their commands through a first-order lag.
The whole robot floats on one vertical degree of freedom (mass ``m``) that is
carried by spring-damper contacts at the four sole corners of each foot, so
leg-length commands move load between the feet and a foot arriving early
produces an impact. Foot heights in the command are relative to the body's
nominal height; the world sole height is ``body_z + foot_z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gait import LEFT, RIGHT, FootGeometry, GaitParams, GaitPhase, Mode
from .terrain import Terrain, terrain_height

AIRBORNE_FORCE = 1.0


class PlantFault(RuntimeError):
    def __init__(self, message: str, tick: int | None = None):
        super().__init__(message if tick is None else f"tick {tick}: {message}")
        self.tick = tick


@dataclass(frozen=True)
class PlantState:
    t: float
    feet: np.ndarray  # (2, 5) x, y, z (relative to body), pitch, roll
    body_z: float
    body_vz: float
    com: np.ndarray  # (2,) horizontal
    penetration: np.ndarray  # (2, 4)
    penetration_rate: np.ndarray  # (2, 4)
    corner_force: np.ndarray  # (2, 4) from the latest substep

    def sole_poses(self) -> np.ndarray:
        """(2, 5) foot poses with z in the world frame."""
        poses = self.feet.copy()
        poses[:, 2] += self.body_z
        return poses


def rotation(pitch: float, roll: float) -> np.ndarray:
    """Ry(pitch) @ Rx(roll); positive pitch lowers the toe, positive roll lifts the left edge."""
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    return np.array([[cp, sp * sr, sp * cr], [0.0, cr, -sr], [-sp, cp * sr, cp * cr]])


def corner_positions(poses: np.ndarray, geom: FootGeometry) -> np.ndarray:
    """(2, 4, 3) world positions of corners A-D for world-frame foot ``poses``."""
    c = geom.corners
    out = np.empty((2, 4, 3))
    for side in (LEFT, RIGHT):
        R = rotation(poses[side, 3], poses[side, 4])
        out[side] = poses[side, :3] + c @ R.T
    return out


def initial_state(com_xy, feet_xy, geom: FootGeometry, weight: float, stiffness: float,
                  t: float = 0.0) -> PlantState:
    """Both feet level on flat ground, body resting at its static equilibrium."""
    feet = np.zeros((2, 5))
    feet[:, :2] = feet_xy
    sink = weight / (8.0 * stiffness)
    pen = np.full((2, 4), sink)
    return PlantState(
        t=t,
        feet=feet,
        body_z=-sink,
        body_vz=0.0,
        com=np.array(com_xy, dtype=float),
        penetration=pen,
        penetration_rate=np.zeros((2, 4)),
        corner_force=stiffness * pen,
    )


def _quintic(u: float) -> float:
    return u ** 3 * (10 - 15 * u + 6 * u * u)


def deflection_bias(phase: GaitPhase, params: GaitParams, deflection: float) -> np.ndarray:
    """Downward sole offset per foot caused by link deflection.

    Builds up on the swing foot over the first half of its swing, is carried
    through touchdown and the following double support, and is released
    while that leg is the single support (where it only moves the body).
    """
    bias = np.zeros(2)
    if deflection == 0.0 or phase.step_index < 0:
        return bias
    if phase.mode is not Mode.DS:
        bias[phase.swing] = deflection * _quintic(min(1.0, 2.0 * phase.s))
        if phase.step_index >= 1:
            landed = params.swing_side(phase.step_index - 1)
            if landed != phase.swing:
                bias[landed] = deflection * (1.0 - _quintic(phase.s))
    elif phase.step_index >= 1:
        bias[params.swing_side(phase.step_index - 1)] = deflection
    return bias


def _lag_factor(dt: float, tau: float) -> float:
    return 1.0 - math.exp(-dt / tau)


def step_plant(state: PlantState, cmd, terrain: Terrain, params, geom: FootGeometry,
               dt_sub: float, bias=None, gravity: float = 9.81) -> PlantState:
    """Advance one substep. ``params`` is a :class:`bumpwalk.config.PlantParams`."""
    if not cmd.is_finite():
        raise PlantFault("non-finite command")
    a = _lag_factor(dt_sub, params.tau_act)
    target = np.empty((2, 5))
    target[:, :2] = cmd.ankle_xy
    target[:, 2] = cmd.p_z_star - (np.zeros(2) if bias is None else bias)
    target[:, 3:] = cmd.theta_mod
    feet = state.feet + a * (target - state.feet)
    com = state.com + a * (np.asarray(cmd.com_mod) - state.com)

    poses = feet.copy()
    poses[:, 2] += state.body_z
    corners = corner_positions(poses, geom)
    ground = terrain_height(terrain, corners[..., 0], corners[..., 1])
    pen = np.maximum(0.0, ground - corners[..., 2])
    rate = (pen - state.penetration) / dt_sub
    force = np.where(
        pen > 0.0,
        np.maximum(0.0, params.contact_stiffness * pen + params.contact_damping * rate),
        0.0,
    )
    body_vz = state.body_vz + dt_sub * (force.sum() / params.mass - gravity)
    body_z = state.body_z + dt_sub * body_vz
    if not (math.isfinite(body_z) and np.all(np.isfinite(feet))):
        raise PlantFault("plant state diverged")
    return PlantState(
        t=state.t + dt_sub,
        feet=feet,
        body_z=body_z,
        body_vz=body_vz,
        com=com,
        penetration=pen,
        penetration_rate=rate,
        corner_force=force,
    )


def read_bump_sensors(state: PlantState, terrain: Terrain, geom: FootGeometry,
                      noise: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """(2, 4) corner-to-ground gaps A-D, clipped to the probe travel."""
    corners = corner_positions(state.sole_poses(), geom)
    gap = corners[..., 2] - terrain_height(terrain, corners[..., 0], corners[..., 1])
    d = np.clip(gap, 0.0, geom.bump_range)
    if noise > 0.0:
        if rng is None:
            raise ValueError("bump noise requires an rng")
        d = np.clip(d + rng.uniform(-noise, noise, size=d.shape), 0.0, geom.bump_range)
    return d


def foot_wrench(corner_force: np.ndarray, poses: np.ndarray, geom: FootGeometry) -> np.ndarray:
    """(2, 6) force and torque in each foot frame, about the sole centre."""
    c = geom.corners
    out = np.zeros((2, 6))
    for side in (LEFT, RIGHT):
        f = corner_force[side]
        if not np.any(f > 0.0):
            continue
        R = rotation(poses[side, 3], poses[side, 4])
        f_local = np.outer(f, R[2])  # R.T @ (0, 0, f) for each corner
        out[side, :3] = f_local.sum(axis=0)
        out[side, 3:] = np.cross(c, f_local).sum(axis=0)
    return out


def read_ft_sensor(corner_forces, poses, geom: FootGeometry, noise: float = 0.0,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Average wrench over the substeps of one control tick.

    ``corner_forces`` and ``poses`` are sequences over substeps of (2, 4) and
    (2, 5) arrays.
    """
    wrenches = [foot_wrench(f, p, geom) for f, p in zip(corner_forces, poses)]
    w = np.mean(wrenches, axis=0)
    if noise > 0.0:
        if rng is None:
            raise ValueError("F/T noise requires an rng")
        loaded = w[:, 2] > 0.0
        w[:, :3] += np.where(loaded[:, None], rng.normal(0.0, noise, size=(2, 3)), 0.0)
        w[:, 2] = np.maximum(w[:, 2], 0.0)
    return w


def center_of_pressure(wrench: np.ndarray, pose: np.ndarray) -> np.ndarray:
    """World (x, y) of one foot's centre of pressure."""
    local = np.array([-wrench[4] / wrench[2], wrench[3] / wrench[2], 0.0])
    R = rotation(pose[3], pose[4])
    return pose[:2] + (R @ local)[:2]


def measured_zmp(wrenches: np.ndarray, poses: np.ndarray, f_min: float = AIRBORNE_FORCE,
                 last=None) -> tuple[np.ndarray, bool]:
    """Force-weighted combination of the per-foot centres of pressure.

    Below ``f_min`` total vertical force the robot counts as airborne; the
    previous valid ZMP (``last``) is returned with ``valid=False``.
    """
    fz = wrenches[:, 2]
    total = float(fz.sum())
    if total <= f_min:
        held = np.zeros(2) if last is None else np.asarray(last, dtype=float)
        return held, False
    zmp = np.zeros(2)
    for side in (LEFT, RIGHT):
        if fz[side] > 0.0:
            zmp += fz[side] * center_of_pressure(wrenches[side], poses[side])
    return zmp / total, True


def patch_status(terrain: Terrain, state: PlantState, geom: FootGeometry) -> np.ndarray:
    """(2, 2) per foot: index of the patch under all four corners, and of any patch under a corner."""
    corners = corner_positions(state.sole_poses(), geom)
    idx = terrain.patch_index(corners[..., 0])
    out = np.full((2, 2), -1, dtype=int)
    for side in (LEFT, RIGHT):
        row = idx[side]
        if row[0] >= 0 and np.all(row == row[0]):
            out[side, 0] = row[0]
        hits = row[row >= 0]
        if hits.size:
            out[side, 1] = hits.max()
    return out


def sole_ground_pitch(terrain: Terrain, state: PlantState, eps: float = 1e-3) -> np.ndarray:
    """True sole-ground pitch angle per foot, same sign as the bump estimate."""
    poses = state.sole_poses()
    out = np.zeros(2)
    for side in (LEFT, RIGHT):
        x, y = poses[side, 0], poses[side, 1]
        slope = (terrain_height(terrain, x + eps, y) - terrain_height(terrain, x - eps, y)) / (2 * eps)
        out[side] = poses[side, 3] + math.atan(slope)
    return out
