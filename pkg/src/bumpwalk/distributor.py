"""Split the robot weight between the feet according to the desired ZMP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gait import LEFT, GaitPhase, Mode


@dataclass(frozen=True)
class DesiredFootForces:
    left: float
    right: float

    def as_array(self) -> np.ndarray:
        return np.array([self.left, self.right])


def support_ratio(zmp_d, left_center, right_center) -> float:
    """Normalised position of the ZMP along the left->right centre segment, clipped to [0, 1]."""
    l = np.asarray(left_center, dtype=float)[:2]
    r = np.asarray(right_center, dtype=float)[:2]
    seg = r - l
    length2 = float(seg @ seg)
    if length2 < 1e-18:
        raise ValueError("degenerate support segment")
    lam = float((np.asarray(zmp_d, dtype=float)[:2] - l) @ seg) / length2
    return min(1.0, max(0.0, lam))


def distribute_vertical_force(zmp_d, left_center, right_center, total_weight: float,
                              phase: GaitPhase) -> DesiredFootForces:
    if not total_weight > 0:
        raise ValueError(f"total_weight must be > 0, got {total_weight}")
    if phase.mode is Mode.SSL:
        return DesiredFootForces(total_weight, 0.0)
    if phase.mode is Mode.SSR:
        return DesiredFootForces(0.0, total_weight)
    right = support_ratio(zmp_d, left_center, right_center) * total_weight
    return DesiredFootForces(total_weight - right, right)


def desired_force(forces: DesiredFootForces, side: int) -> float:
    return forces.left if side == LEFT else forces.right
