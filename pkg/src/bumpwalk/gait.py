"""Shared gait types: walking parameters, the support-phase clock, foot geometry and gains.

Frames and units are SI throughout. World frame: x forward, y left, z up.
Foot index 0 is the left foot, 1 the right foot. A single-support mode is
named after its *stance* foot, so ``Mode.SSL`` means the left foot carries
the robot while the right foot swings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

LEFT = 0
RIGHT = 1
SIDES = ("left", "right")

CONTROL_RATE_HZ = 200.0
CONTROL_DT = 1.0 / CONTROL_RATE_HZ


class Mode(enum.Enum):
    DS = "DS"
    SSL = "SSL"
    SSR = "SSR"

    @property
    def stance(self) -> tuple[int, ...]:
        if self is Mode.SSL:
            return (LEFT,)
        if self is Mode.SSR:
            return (RIGHT,)
        return (LEFT, RIGHT)

    @property
    def swing(self) -> int | None:
        if self is Mode.SSL:
            return RIGHT
        if self is Mode.SSR:
            return LEFT
        return None


def side_index(side: str | int) -> int:
    if isinstance(side, int):
        if side not in (LEFT, RIGHT):
            raise ValueError(f"foot index must be 0 or 1, got {side}")
        return side
    key = side.strip().lower()
    if key in ("l", "left"):
        return LEFT
    if key in ("r", "right"):
        return RIGHT
    raise ValueError(f"unknown foot side {side!r}")


@dataclass(frozen=True)
class GaitParams:
    step_length: float = 0.25
    step_time: float = 0.9
    double_support_fraction: float = 0.2
    com_height: float = 0.68
    gravity: float = 9.81
    swing_apex_height: float = 0.04
    n_steps: int = 10
    hip_width: float = 0.23
    first_swing: int = RIGHT
    initial_hold: float = 1.0
    final_hold: float = 1.0

    def __post_init__(self):
        if not self.step_time > 0:
            raise ValueError(f"step_time must be > 0, got {self.step_time}")
        if not self.step_length >= 0:
            raise ValueError(f"step_length must be >= 0, got {self.step_length}")
        if not 0 < self.double_support_fraction < 1:
            raise ValueError(
                "double_support_fraction must lie in (0, 1), "
                f"got {self.double_support_fraction}"
            )
        if not self.com_height > 0:
            raise ValueError(f"com_height must be > 0, got {self.com_height}")
        if not self.gravity > 0:
            raise ValueError(f"gravity must be > 0, got {self.gravity}")
        if not self.swing_apex_height > 0:
            raise ValueError(f"swing_apex_height must be > 0, got {self.swing_apex_height}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be an integer >= 1, got {self.n_steps}")
        if not self.hip_width > 0:
            raise ValueError(f"hip_width must be > 0, got {self.hip_width}")
        if self.first_swing not in (LEFT, RIGHT):
            raise ValueError(f"first_swing must be LEFT or RIGHT, got {self.first_swing}")
        if not self.final_hold >= 0:
            raise ValueError(f"final_hold must be >= 0, got {self.final_hold}")
        if not self.initial_hold >= 0:
            raise ValueError(f"initial_hold must be >= 0, got {self.initial_hold}")

    @property
    def omega(self) -> float:
        """Natural frequency of the linear inverted pendulum, sqrt(g / z_c)."""
        return math.sqrt(self.gravity / self.com_height)

    @property
    def ds_duration(self) -> float:
        return self.step_time * self.double_support_fraction

    @property
    def ss_duration(self) -> float:
        return self.step_time - self.ds_duration

    def swing_side(self, step_index: int) -> int:
        """Foot that swings during step ``step_index`` (0-based)."""
        return self.first_swing if step_index % 2 == 0 else 1 - self.first_swing


@dataclass(frozen=True)
class GaitPhase:
    mode: Mode = Mode.DS
    s: float = 0.0
    step_index: int = 0

    @property
    def swing(self) -> int | None:
        return self.mode.swing

    def is_terminal(self, params: GaitParams) -> bool:
        return self.mode is Mode.DS and self.step_index >= params.n_steps


def mode_duration(mode: Mode, params: GaitParams) -> float:
    return params.ds_duration if mode is Mode.DS else params.ss_duration


def _single_support_mode(params: GaitParams, step_index: int) -> Mode:
    return Mode.SSR if params.swing_side(step_index) == LEFT else Mode.SSL


def advance_phase(phase: GaitPhase, params: GaitParams, dt: float) -> GaitPhase:
    """Advance the support-phase clock by ``dt``.

    Cycle is DS -> SS -> DS -> ... with ``step_index`` counting completed
    single-support phases. Overshoot past a boundary carries into the next
    mode, except that a phase already sitting at s >= 1 switches and restarts
    at s = 0. After the last step the clock saturates in a terminal DS.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if phase.is_terminal(params):
        return GaitPhase(Mode.DS, min(1.0, phase.s + dt / params.ds_duration), phase.step_index)

    duration = mode_duration(phase.mode, params)
    if phase.s >= 1.0:
        carry_time = 0.0
    else:
        s_new = phase.s + dt / duration
        # tolerate accumulated round-off so tick-aligned boundaries switch on time
        if s_new < 1.0 - 1e-9:
            return GaitPhase(phase.mode, s_new, phase.step_index)
        carry_time = max(0.0, (s_new - 1.0) * duration)

    if phase.mode is Mode.DS:
        nxt = GaitPhase(_single_support_mode(params, phase.step_index), 0.0, phase.step_index)
    else:
        nxt = GaitPhase(Mode.DS, 0.0, phase.step_index + 1)
    if nxt.is_terminal(params):
        return GaitPhase(Mode.DS, min(1.0, carry_time / params.ds_duration), nxt.step_index)
    if carry_time > 1e-12:
        return GaitPhase(nxt.mode, carry_time / mode_duration(nxt.mode, params), nxt.step_index)
    return nxt


@dataclass(frozen=True)
class FootGeometry:
    """Sole and bump-sensor layout in the foot frame (origin at the sole centre).

    Corners: A front-left, B back-left, C back-right, D front-right. The bump
    probes sit at these corners and the corners are also the contact points.
    """

    sensor_length: float = 0.10
    sensor_width: float = 0.08
    sole_half_length: float = 0.06
    sole_half_width: float = 0.05
    bump_range: float = 0.02

    def __post_init__(self):
        if not self.sensor_length > 0:
            raise ValueError(f"sensor_length must be > 0, got {self.sensor_length}")
        if not self.sensor_width > 0:
            raise ValueError(f"sensor_width must be > 0, got {self.sensor_width}")
        if self.sole_half_length < self.sensor_length / 2:
            raise ValueError("sole_half_length must cover the sensor rows")
        if self.sole_half_width < self.sensor_width / 2:
            raise ValueError("sole_half_width must cover the sensor columns")
        if not self.bump_range > 0:
            raise ValueError(f"bump_range must be > 0, got {self.bump_range}")

    @property
    def corners(self) -> np.ndarray:
        """(4, 3) corner positions A, B, C, D in the foot frame."""
        hl, hw = self.sensor_length / 2, self.sensor_width / 2
        return np.array(
            [[hl, hw, 0.0], [-hl, hw, 0.0], [-hl, -hw, 0.0], [hl, -hw, 0.0]]
        )

    @property
    def sole_outline(self) -> np.ndarray:
        hl, hw = self.sole_half_length, self.sole_half_width
        return np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])


@dataclass(frozen=True)
class Gains:
    kp: float
    kr: float

    def __post_init__(self):
        if not (math.isfinite(self.kp) and self.kp >= 0):
            raise ValueError(f"kp must be finite and >= 0, got {self.kp}")
        if not (math.isfinite(self.kr) and self.kr >= 0):
            raise ValueError(f"kr must be finite and >= 0, got {self.kr}")


@dataclass(frozen=True)
class ZmpComGains:
    k_zmp: float
    k_com: float

    @classmethod
    def scaled(cls, omega: float, zmp_scale: float, com_scale: float) -> "ZmpComGains":
        return cls(zmp_scale * omega, com_scale * omega)

    @classmethod
    def default(cls, omega: float) -> "ZmpComGains":
        # ZMP gain above omega, CoM gain below it
        return cls.scaled(omega, *ZMP_COM_SCALES["hardware"])


# Controller coefficients used on the hardware
HARDWARE_GAINS = {
    "force": Gains(kp=5e-5, kr=1.0),
    "bump": Gains(kp=5e-3, kr=1.0),
    "orientation": Gains(kp=1.58e-2, kr=6.0),
}

# Gains that meet the desk-scale ablation and slope-settling targets
CALIBRATED_GAINS = {
    "force": Gains(kp=5e-5, kr=1.0),
    "bump": Gains(kp=40.0, kr=1.0),
    "orientation": Gains(kp=40.0, kr=4.0),
}

GAIN_SETS = {"hardware": HARDWARE_GAINS, "calibrated": CALIBRATED_GAINS}

# ZMP-CoM gains as multiples of omega. Both sets keep k_zmp > omega > k_com;
# the calibrated pair keeps their ratio, and with it the CoM offset produced
# by a persistent ZMP error, close to one.
ZMP_COM_SCALES = {"hardware": (2.0, 0.5), "calibrated": (1.1, 0.9)}


@dataclass(frozen=True)
class Clamps:
    dz: float = 0.03
    du: float = 0.02
    dtheta: float = 0.25


@dataclass(frozen=True)
class BumpWindow:
    """Part of the swing phase in which the bump layer may act."""

    s_on: float = 0.5
    s_off: float = 1.0
    sensor_offset: float = 0.0


# what happens to a foot's bump offset after touchdown
DU_POLICIES = ("release", "reset", "decay")


@dataclass(frozen=True)
class ControlParams:
    force: Gains = field(default_factory=lambda: HARDWARE_GAINS["force"])
    bump: Gains = field(default_factory=lambda: HARDWARE_GAINS["bump"])
    orientation: Gains = field(default_factory=lambda: HARDWARE_GAINS["orientation"])
    zmp_com: ZmpComGains | None = None
    clamps: Clamps = field(default_factory=Clamps)
    window: BumpWindow = field(default_factory=BumpWindow)
    rate_hz: float = CONTROL_RATE_HZ
    du_policy: str = "release"

    def __post_init__(self):
        if not self.rate_hz > 0:
            raise ValueError(f"rate_hz must be > 0, got {self.rate_hz}")
        if self.du_policy not in DU_POLICIES:
            raise ValueError(f"du_policy must be one of {DU_POLICIES}, got {self.du_policy!r}")
        if not 0.0 <= self.window.s_on <= self.window.s_off <= 1.0:
            raise ValueError("bump window must satisfy 0 <= s_on <= s_off <= 1")

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    def zmp_com_gains(self, omega: float) -> ZmpComGains:
        return self.zmp_com if self.zmp_com is not None else ZmpComGains.default(omega)
