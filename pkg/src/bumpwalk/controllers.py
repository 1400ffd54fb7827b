"""Online adaptation layers acting on the planned ankle and CoM commands.

* force layer: leg-length offset from the left/right vertical-force difference
* bump layer: per-foot height offset from the bump-sensor ground distance
* orientation layer: ankle pitch/roll offsets from the sole-ground angles
* ZMP-CoM layer: CoM position offset from ZMP and CoM tracking errors

The first three are leaky integrators ``x' = kp e - kr x`` stepped with
explicit Euler. Every error is formed as desired minus measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributor import DesiredFootForces, distribute_vertical_force
from .gait import (
    LEFT,
    RIGHT,
    BumpWindow,
    Clamps,
    FootGeometry,
    GaitPhase,
    Gains,
    ZmpComGains,
)


def _check_finite(*values, what: str = "input") -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite {what}: {v!r}")


def leaky_step(x, e, gains: Gains, dt: float, clamp: float | None = None):
    """One explicit-Euler step of ``x' = kp e - kr x``, optionally saturated."""
    x_new = x + dt * (gains.kp * e - gains.kr * x)
    if clamp is not None:
        x_new = np.clip(x_new, -clamp, clamp)
        if np.ndim(x_new) == 0:
            x_new = float(x_new)
    return x_new


@dataclass
class AdaptationState:
    dz: float = 0.0
    du: np.ndarray = field(default_factory=lambda: np.zeros(2))
    dtheta: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))  # foot x (pitch, roll)
    com_correction: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def copy(self) -> "AdaptationState":
        return AdaptationState(
            self.dz, self.du.copy(), self.dtheta.copy(), self.com_correction.copy()
        )


@dataclass(frozen=True)
class ModifiedCommand:
    ankle_xy: np.ndarray  # (2, 2), passed through from the plan
    p_z_mod: np.ndarray  # (2,) after the force layer
    p_z_star: np.ndarray  # (2,) after the bump layer
    theta_mod: np.ndarray  # (2, 2) pitch, roll per foot
    com_mod: np.ndarray  # (2,)

    def is_finite(self) -> bool:
        return all(
            bool(np.all(np.isfinite(a)))
            for a in (self.ankle_xy, self.p_z_mod, self.p_z_star, self.theta_mod, self.com_mod)
        )


# -- force layer ----------------------------------------------------------------

def force_difference_error(desired: DesiredFootForces, f_left: float, f_right: float) -> float:
    return (desired.left - desired.right) - (f_left - f_right)


def apply_leg_length(p_zd, dz: float) -> np.ndarray:
    """Lower the left ankle and raise the right one by half of ``dz`` each."""
    p_zd = np.asarray(p_zd, dtype=float)
    return np.array([p_zd[LEFT] - 0.5 * dz, p_zd[RIGHT] + 0.5 * dz])


def force_difference_update(desired: DesiredFootForces, f_left: float, f_right: float,
                            dz: float, p_zd, gains: Gains, dt: float,
                            clamp: float | None = None):
    """Returns the new leg-length offset and the modified ankle heights."""
    _check_finite(f_left, f_right, desired.left, desired.right, what="force")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e = force_difference_error(desired, f_left, f_right)
    dz_new = leaky_step(dz, e, gains, dt, clamp)
    return dz_new, apply_leg_length(p_zd, dz_new)


# -- bump layer -----------------------------------------------------------------

def average_distance(readings) -> float:
    r = np.asarray(readings, dtype=float)
    return float(r.sum() / 4.0)


def bump_layer_active(side: int, phase: GaitPhase, d_avg: float, window: BumpWindow,
                      bump_range: float = 0.02) -> bool:
    """Swing foot, late enough in the swing, and ground within probe travel."""
    return (
        phase.swing == side
        and window.s_on <= phase.s <= window.s_off
        and d_avg < bump_range
    )


def bump_proximity_update(d_avg: float, p_z_mod: float, du: float, active: bool,
                          gains: Gains, dt: float, clamp: float | None = None,
                          sensor_offset: float = 0.0, bump_range: float = 0.02):
    """Returns the new height offset and ``p_z_star`` for one foot.

    Sensed sole height is ``d_avg + sensor_offset``. While inactive only the
    leak acts on the offset.
    """
    if not (math.isfinite(d_avg) and -1e-12 <= d_avg <= bump_range + 1e-12):
        raise ValueError(f"sensor reading out of range: {d_avg!r}")
    _check_finite(p_z_mod, du, what="height")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e = p_z_mod - (d_avg + sensor_offset) if active else 0.0
    du_new = leaky_step(du, e, gains, dt, clamp)
    return du_new, p_z_mod + du_new


def release_ramp(s: float) -> float:
    """Quintic smoothstep from 0 at ``s = 0`` to 1 at ``s = 1``."""
    s = min(1.0, max(0.0, s))
    return s ** 3 * (10 - 15 * s + 6 * s * s)


# -- orientation layer --------------------------------------------------------------

def estimate_sole_angles(readings, geom: FootGeometry) -> tuple[float, float]:
    """Sole-ground pitch and roll from the four corner distances A, B, C, D.

    Pitch is positive when the toe is closer to the ground than the heel,
    roll positive when the right edge is closer than the left edge.
    """
    d_a, d_b, d_c, d_d = (float(v) for v in readings)
    pitch = math.atan(((d_b + d_c) / 2 - (d_a + d_d) / 2) / geom.sensor_length)
    roll = math.atan(((d_a + d_b) / 2 - (d_c + d_d) / 2) / geom.sensor_width)
    return pitch, roll


def ankle_orientation_update(alpha_m, theta_d, dtheta, active: bool, gains: Gains,
                             dt: float, clamp: float | None = None, alpha_d=(0.0, 0.0)):
    """One foot: ``alpha_m``, ``theta_d``, ``dtheta`` are (pitch, roll) pairs.

    Returns the new offsets and ``theta_mod = theta_d + dtheta``.
    """
    alpha_m = np.asarray(alpha_m, dtype=float)
    _check_finite(alpha_m, theta_d, dtheta, what="angle")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e = (np.asarray(alpha_d, dtype=float) - alpha_m) if active else np.zeros(2)
    dtheta_new = leaky_step(np.asarray(dtheta, dtype=float), e, gains, dt, clamp)
    return dtheta_new, np.asarray(theta_d, dtype=float) + dtheta_new


# -- ZMP-CoM layer ------------------------------------------------------------------

def zmp_com_update(zmp_d, zmp_m, com_d, com_m, correction, gains: ZmpComGains, dt: float):
    """CoM velocity offset ``u = -k_zmp e_zmp + k_com e_com``, integrated into the CoM."""
    _check_finite(zmp_d, zmp_m, com_d, com_m, correction, what="ZMP/CoM")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e_zmp = np.asarray(zmp_d, dtype=float) - np.asarray(zmp_m, dtype=float)
    e_com = np.asarray(com_d, dtype=float) - np.asarray(com_m, dtype=float)
    u = -gains.k_zmp * e_zmp + gains.k_com * e_com
    correction_new = np.asarray(correction, dtype=float) + u * dt
    return correction_new, np.asarray(com_d, dtype=float) + correction_new


# -- composition --------------------------------------------------------------------

def compose_commands(sample, state: AdaptationState) -> ModifiedCommand:
    """Sum every layer's offset onto the planner sample."""
    p_z_mod = apply_leg_length(sample.ankle_pos[:, 2], state.dz)
    return ModifiedCommand(
        ankle_xy=np.array(sample.ankle_pos[:, :2]),
        p_z_mod=p_z_mod,
        p_z_star=p_z_mod + state.du,
        theta_mod=np.asarray(sample.ankle_rot) + state.dtheta,
        com_mod=np.asarray(sample.com_pos) + state.com_correction,
    )


class AdaptationLoop:
    """Owns the controller state and runs one tick in the fixed layer order."""

    def __init__(self, control, foot: FootGeometry, layers, weight: float,
                 zmp_com_gains: ZmpComGains):
        self.control = control
        self.foot = foot
        self.layers = layers
        self.weight = weight
        self.zmp_com_gains = zmp_com_gains
        self.state = AdaptationState()
        self._last_swing: int | None = None
        # bump offsets handed back to the plan after touchdown ("release" policy)
        self._latched = np.zeros(2)
        self._release_step = [-1, -1]

    @property
    def clamps(self) -> Clamps:
        return self.control.clamps

    def step(self, sample, bump, wrench, zmp_m, com_m) -> tuple[ModifiedCommand, dict]:
        """``bump`` (2, 4) corner distances, ``wrench`` (2, 6) per-foot F/T."""
        ctrl, layers, st = self.control, self.layers, self.state
        dt = ctrl.dt
        phase = sample.phase
        feet_xy = sample.ankle_pos[:, :2]
        tel: dict[str, float] = {}

        desired = distribute_vertical_force(
            sample.zmp_ref, feet_xy[LEFT], feet_xy[RIGHT], self.weight, phase
        )
        f_left, f_right = float(wrench[LEFT, 2]), float(wrench[RIGHT, 2])
        tel["fzd_l"], tel["fzd_r"] = desired.left, desired.right
        tel["e_force"] = force_difference_error(desired, f_left, f_right)
        if layers.force:
            st.dz, p_z_mod = force_difference_update(
                desired, f_left, f_right, st.dz, sample.ankle_pos[:, 2], ctrl.force, dt,
                self.clamps.dz,
            )
        else:
            p_z_mod = apply_leg_length(sample.ankle_pos[:, 2], st.dz)

        # touchdown: a foot that swung last tick is now supporting
        touchdown = self._last_swing is not None and phase.swing != self._last_swing
        if touchdown:
            landed = self._last_swing
            if ctrl.du_policy == "reset":
                st.du[landed] = 0.0
            elif ctrl.du_policy == "release":
                self._latched[landed] = st.du[landed]
                self._release_step[landed] = phase.step_index
        self._last_swing = phase.swing

        bump_range = self.foot.bump_range
        for side, tag in ((LEFT, "l"), (RIGHT, "r")):
            d_avg = average_distance(bump[side])
            active = layers.bump and bump_layer_active(side, phase, d_avg, ctrl.window, bump_range)
            tel[f"bump_on_{tag}"] = float(active)
            tel[f"e_bump_{tag}"] = p_z_mod[side] - (d_avg + ctrl.window.sensor_offset)
            if self._release_step[side] == phase.step_index:
                # held through double support, ramped out while this leg is the sole support
                ramp = release_ramp(phase.s) if phase.swing is not None else 0.0
                st.du[side] = self._latched[side] * (1.0 - ramp)
            elif layers.bump:
                st.du[side], _ = bump_proximity_update(
                    d_avg, p_z_mod[side], st.du[side], active, ctrl.bump, dt,
                    self.clamps.du, ctrl.window.sensor_offset, bump_range,
                )

            alpha = estimate_sole_angles(bump[side], self.foot)
            tel[f"alpha_pitch_{tag}"], tel[f"alpha_roll_{tag}"] = alpha
            ori_active = layers.orientation and d_avg < bump_range
            tel[f"ori_on_{tag}"] = float(ori_active)
            if layers.orientation:
                st.dtheta[side], _ = ankle_orientation_update(
                    alpha, sample.ankle_rot[side], st.dtheta[side], ori_active,
                    ctrl.orientation, dt, self.clamps.dtheta,
                )

        if layers.zmp_com:
            st.com_correction, _ = zmp_com_update(
                sample.zmp_ref, zmp_m, sample.com_pos, com_m, st.com_correction,
                self.zmp_com_gains, dt,
            )

        cmd = compose_commands(sample, st)
        tel["dz"] = st.dz
        tel["du_l"], tel["du_r"] = st.du
        tel["dth_pitch_l"], tel["dth_roll_l"] = st.dtheta[LEFT]
        tel["dth_pitch_r"], tel["dth_roll_r"] = st.dtheta[RIGHT]
        tel["com_corr_x"], tel["com_corr_y"] = st.com_correction
        return cmd, tel
