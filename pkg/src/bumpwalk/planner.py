"""Straight-ahead walking pattern from the divergent component of motion (DCM).

The ZMP reference is piecewise linear: constant on the stance foot in single
support and a linear shift between foot centres in double support. The DCM
is solved backward in closed form from its terminal value, and the CoM is
integrated forward exactly over each control tick.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gait import CONTROL_DT, LEFT, RIGHT, GaitParams, GaitPhase, Mode


@dataclass(frozen=True)
class Foothold:
    x: float
    y: float
    side: int
    yaw: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class FootstepPlan:
    start: tuple[Foothold, Foothold]  # initial (left, right) poses
    footholds: tuple[Foothold, ...]

    def stance_during(self, step: int) -> Foothold:
        """Stance foot while step ``step`` swings (0-based)."""
        swing_side = self.footholds[step].side
        for k in range(step - 1, -1, -1):
            if self.footholds[k].side != swing_side:
                return self.footholds[k]
        return self.start[1 - swing_side]

    def resting(self, step: int, side: int) -> Foothold:
        """Where foot ``side`` is before step ``step`` starts."""
        for k in range(step - 1, -1, -1):
            if self.footholds[k].side == side:
                return self.footholds[k]
        return self.start[side]


def plan_footsteps(params: GaitParams, start_x: float = 0.0, start_y: float = 0.0) -> FootstepPlan:
    """Alternating footholds, each ``step_length`` ahead of the previous one."""
    half = params.hip_width / 2
    start = (
        Foothold(start_x, start_y + half, LEFT),
        Foothold(start_x, start_y - half, RIGHT),
    )
    holds = []
    for k in range(params.n_steps):
        side = params.swing_side(k)
        y = start_y + (half if side == LEFT else -half)
        holds.append(Foothold(start_x + (k + 1) * params.step_length, y, side))
    return FootstepPlan(start, tuple(holds))


@dataclass(frozen=True)
class Segment:
    """ZMP moves linearly from ``p0`` to ``p1`` over ticks [k0, k0 + n)."""

    k0: int
    n: int
    p0: np.ndarray
    p1: np.ndarray
    mode: Mode
    step_index: int
    hold: bool = False


@dataclass(frozen=True)
class ZmpReference:
    segments: tuple[Segment, ...]
    dt: float

    @property
    def n_ticks(self) -> int:
        last = self.segments[-1]
        return last.k0 + last.n

    @property
    def duration(self) -> float:
        return self.n_ticks * self.dt

    def segment_at(self, k: int) -> Segment:
        for seg in self.segments:
            if k < seg.k0 + seg.n:
                return seg
        return self.segments[-1]

    def __call__(self, t: float) -> np.ndarray:
        k = int(math.floor(t / self.dt + 1e-9))
        seg = self.segment_at(max(0, k))
        frac = min(1.0, max(0.0, (t / self.dt - seg.k0) / seg.n)) if seg.n else 1.0
        return seg.p0 + (seg.p1 - seg.p0) * frac

    def sample(self) -> np.ndarray:
        """(n_ticks + 1, 2) reference at every tick, including the end time."""
        out = np.empty((self.n_ticks + 1, 2))
        for seg in self.segments:
            j = np.arange(seg.n)[:, None]
            out[seg.k0:seg.k0 + seg.n] = seg.p0 + (seg.p1 - seg.p0) * (j / seg.n)
        out[-1] = self.segments[-1].p1
        return out


def _ticks(duration: float, dt: float) -> int:
    return max(1, int(round(duration / dt)))


def plan_zmp_reference(plan: FootstepPlan, params: GaitParams, dt: float = CONTROL_DT) -> ZmpReference:
    n_ds, n_ss = _ticks(params.ds_duration, dt), _ticks(params.ss_duration, dt)
    segments = []
    k = 0
    prev = (plan.start[LEFT].xy + plan.start[RIGHT].xy) / 2
    n_init = int(round(params.initial_hold / dt))
    if n_init:
        segments.append(Segment(k, n_init, prev, prev, Mode.DS, 0, hold=True))
        k += n_init
    for step in range(len(plan.footholds)):
        stance = plan.stance_during(step).xy
        swing_side = plan.footholds[step].side
        ss_mode = Mode.SSR if swing_side == LEFT else Mode.SSL
        segments.append(Segment(k, n_ds, prev, stance, Mode.DS, step))
        k += n_ds
        segments.append(Segment(k, n_ss, stance, stance, ss_mode, step))
        k += n_ss
        prev = stance
    n = len(plan.footholds)
    final = (plan.footholds[-1].xy + plan.resting(n, 1 - plan.footholds[-1].side).xy) / 2
    segments.append(Segment(k, n_ds, prev, final, Mode.DS, n))
    k += n_ds
    n_hold = int(round(params.final_hold / dt))
    if n_hold:
        segments.append(Segment(k, n_hold, final, final, Mode.DS, n, hold=True))
    return ZmpReference(tuple(segments), dt)


@dataclass(frozen=True)
class DcmTrajectory:
    """Closed-form DCM: per segment, xi(t) = p(t) + v/w + c * exp(w (t - t_end))."""

    zmp: ZmpReference
    omega: float
    xi_end: np.ndarray  # DCM at the end of each segment, (n_segments, 2)

    def coefficients(self, i: int):
        seg = self.zmp.segments[i]
        T = seg.n * self.zmp.dt
        v = (seg.p1 - seg.p0) / T
        c = self.xi_end[i] - seg.p1 - v / self.omega
        return seg, T, v, c

    def xi_start(self, i: int) -> np.ndarray:
        seg, T, v, c = self.coefficients(i)
        return seg.p0 + v / self.omega + c * math.exp(-self.omega * T)

    def sample(self) -> np.ndarray:
        out = np.empty((self.zmp.n_ticks + 1, 2))
        dt, w = self.zmp.dt, self.omega
        for i, seg in enumerate(self.zmp.segments):
            _, T, v, c = self.coefficients(i)
            tau = (np.arange(seg.n) * dt)[:, None]
            p = seg.p0 + v * tau
            out[seg.k0:seg.k0 + seg.n] = p + v / w + c * np.exp(w * (tau - T))
        out[-1] = self.xi_end[-1]
        return out


def compute_dcm_trajectory(zmp: ZmpReference, params: GaitParams,
                           xi_final: np.ndarray | None = None) -> DcmTrajectory:
    """Backward recursion from ``xi(T_end) = final ZMP`` (or ``xi_final``)."""
    w = params.omega
    segs = zmp.segments
    xi_end = np.empty((len(segs), 2))
    xi = np.array(segs[-1].p1 if xi_final is None else xi_final, dtype=float)
    for i in range(len(segs) - 1, -1, -1):
        seg = segs[i]
        T = seg.n * zmp.dt
        v = (seg.p1 - seg.p0) / T
        xi_end[i] = xi
        xi = seg.p0 + v / w + (xi - seg.p1 - v / w) * math.exp(-w * T)
    return DcmTrajectory(zmp, w, xi_end)


def compute_com_trajectory(dcm: DcmTrajectory, params: GaitParams,
                           com0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Integrate xdot = w (xi - x) tick by tick with the exact solution.

    Over a tick the DCM is ``a + b s + g exp(w s)``, for which
    ``x(s) = a - b/w + b s + (g/2) exp(w s) + K exp(-w s)``.
    """
    w, dt = params.omega, dcm.zmp.dt
    n = dcm.zmp.n_ticks
    pos = np.empty((n + 1, 2))
    x = np.array(dcm.zmp.segments[0].p0 if com0 is None else com0, dtype=float)
    pos[0] = x
    ew, emw = math.exp(w * dt), math.exp(-w * dt)
    for i, seg in enumerate(dcm.zmp.segments):
        _, T, v, c = dcm.coefficients(i)
        for j in range(seg.n):
            tau = j * dt
            a = seg.p0 + v * tau + v / w
            g = c * math.exp(w * (tau - T))
            K = x - a + v / w - g / 2
            x = a - v / w + v * dt + (g / 2) * ew + K * emw
            pos[seg.k0 + j + 1] = x
    xi = dcm.sample()
    vel = w * (xi - pos)
    return pos, vel


def _quintic(u):
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10 - 15 * u + 6 * u ** 2)


def swing_profile(s, apex: float):
    """Two-segment quintic height: 0 at s=0 and s=1, ``apex`` at s=0.5."""
    s = np.asarray(s, dtype=float)
    return apex * np.where(s <= 0.5, _quintic(2 * s), _quintic(2 * (1 - s)))


def plan_swing_trajectory(plan: FootstepPlan, params: GaitParams, zmp: ZmpReference):
    """Ankle positions (n+1, 2, 3) and pitch/roll (n+1, 2, 2) at every tick."""
    n = zmp.n_ticks
    pos = np.zeros((n + 1, 2, 3))
    rot = np.zeros((n + 1, 2, 2))
    feet = [plan.start[LEFT].xy.copy(), plan.start[RIGHT].xy.copy()]
    for seg in zmp.segments:
        rows = slice(seg.k0, seg.k0 + seg.n)
        if seg.mode is Mode.DS:
            for side in (LEFT, RIGHT):
                pos[rows, side, :2] = feet[side]
            continue
        swing = seg.mode.swing
        stance = 1 - swing
        target = plan.footholds[seg.step_index].xy
        s = np.arange(seg.n) / seg.n
        q = _quintic(s)[:, None]
        pos[rows, stance, :2] = feet[stance]
        pos[rows, swing, :2] = feet[swing] + (target - feet[swing]) * q
        pos[rows, swing, 2] = swing_profile(s, params.swing_apex_height)
        feet[swing] = target.copy()
    pos[n, LEFT, :2] = feet[LEFT]
    pos[n, RIGHT, :2] = feet[RIGHT]
    return pos, rot


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    com_pos: np.ndarray
    com_vel: np.ndarray
    dcm: np.ndarray
    zmp_ref: np.ndarray
    ankle_pos: np.ndarray  # (2, 3) left/right x, y, z
    ankle_rot: np.ndarray  # (2, 2) left/right pitch, roll
    phase: GaitPhase


@dataclass(frozen=True)
class WalkPlan:
    params: GaitParams
    footsteps: FootstepPlan
    zmp: ZmpReference
    dcm_traj: DcmTrajectory
    t: np.ndarray
    com_pos: np.ndarray
    com_vel: np.ndarray
    dcm: np.ndarray
    zmp_ref: np.ndarray
    ankle_pos: np.ndarray
    ankle_rot: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return self.zmp.dt

    def phase(self, k: int) -> GaitPhase:
        seg = self.zmp.segment_at(k)
        if k >= self.zmp.n_ticks:
            return GaitPhase(Mode.DS, 1.0, self.params.n_steps)
        if seg.hold and seg.step_index == 0:
            # standing still before the first weight shift
            return GaitPhase(Mode.DS, 0.0, 0)
        if seg.step_index >= self.params.n_steps:
            # terminal double support saturates at s = 1
            first = next(s for s in self.zmp.segments if s.step_index >= self.params.n_steps)
            return GaitPhase(Mode.DS, min(1.0, (k - first.k0) / first.n), seg.step_index)
        return GaitPhase(seg.mode, (k - seg.k0) / seg.n, seg.step_index)

    def sample(self, k: int) -> TrajectorySample:
        return TrajectorySample(
            t=float(self.t[k]),
            com_pos=self.com_pos[k],
            com_vel=self.com_vel[k],
            dcm=self.dcm[k],
            zmp_ref=self.zmp_ref[k],
            ankle_pos=self.ankle_pos[k],
            ankle_rot=self.ankle_rot[k],
            phase=self.phase(k),
        )

    def mode_switch_ticks(self) -> np.ndarray:
        return np.array([seg.k0 for seg in self.zmp.segments[1:]])

    @property
    def walk_start_tick(self) -> int:
        first = self.zmp.segments[0]
        return first.n if first.hold else 0

    def step_start_tick(self, step: int) -> int:
        """First tick of the double support that begins step ``step``."""
        for seg in self.zmp.segments:
            if seg.step_index == step and not seg.hold:
                return seg.k0
        return self.zmp.n_ticks


def plan_walk(params: GaitParams, dt: float = CONTROL_DT, start_x: float = 0.0,
              start_y: float = 0.0) -> WalkPlan:
    steps = plan_footsteps(params, start_x, start_y)
    zmp = plan_zmp_reference(steps, params, dt)
    dcm = compute_dcm_trajectory(zmp, params)
    com_pos, com_vel = compute_com_trajectory(dcm, params)
    ankle_pos, ankle_rot = plan_swing_trajectory(steps, params, zmp)
    n = zmp.n_ticks
    return WalkPlan(
        params=params,
        footsteps=steps,
        zmp=zmp,
        dcm_traj=dcm,
        t=np.arange(n + 1) * dt,
        com_pos=com_pos,
        com_vel=com_vel,
        dcm=dcm.sample(),
        zmp_ref=zmp.sample(),
        ankle_pos=ankle_pos,
        ankle_rot=ankle_rot,
    )


PLAN_COLUMNS = (
    "t", "com_x", "com_y", "dcm_x", "dcm_y", "zmp_x", "zmp_y",
    "l_x", "l_y", "l_z", "l_pitch", "l_roll",
    "r_x", "r_y", "r_z", "r_pitch", "r_roll",
    "mode", "s", "step",
)


def write_plan_csv(plan: WalkPlan, path) -> Path:
    """One row per tick: t, CoM, DCM, ZMP, left/right ankle pose, phase."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLAN_COLUMNS)
        for k in range(plan.n_samples):
            ph = plan.phase(k)
            row = [plan.t[k], *plan.com_pos[k], *plan.dcm[k], *plan.zmp_ref[k]]
            for side in (LEFT, RIGHT):
                row += [*plan.ankle_pos[k, side], *plan.ankle_rot[k, side]]
            writer.writerow(
                [f"{v:.9e}" for v in row] + [ph.mode.value, f"{ph.s:.6f}", ph.step_index]
            )
    return path
