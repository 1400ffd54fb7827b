"""Piecewise-planar terrain made of inclined patches over a flat z=0 ground."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_MAX_HEIGHT = 0.025


@dataclass(frozen=True)
class Patch:
    """Planar plate over ``x_start <= x < x_end``, spanning all y.

    Height is ``height + (x - x_start) tan(pitch) + (y - y_ref) tan(roll)``,
    clipped to ``[0, max_height]`` of the owning terrain. ``pitch_deg`` is the
    rise along +x, ``roll_deg`` the rise along +y.
    """

    x_start: float
    x_end: float
    height: float = 0.0
    pitch_deg: float = 0.0
    roll_deg: float = 0.0
    y_ref: float = 0.0

    def __post_init__(self):
        if not self.x_end > self.x_start:
            raise ValueError(f"patch x_end ({self.x_end}) must exceed x_start ({self.x_start})")
        if abs(self.pitch_deg) >= 60 or abs(self.roll_deg) >= 60:
            raise ValueError("patch slopes must be below 60 degrees")

    def contains(self, x):
        return (x >= self.x_start) & (x < self.x_end)


@dataclass(frozen=True)
class Terrain:
    patches: tuple[Patch, ...] = ()
    max_height: float = DEFAULT_MAX_HEIGHT

    def __post_init__(self):
        ordered = sorted(self.patches, key=lambda p: p.x_start)
        for a, b in zip(ordered, ordered[1:]):
            if b.x_start < a.x_end:
                raise ValueError(
                    f"patches overlap in x: [{a.x_start}, {a.x_end}) and [{b.x_start}, {b.x_end})"
                )
        object.__setattr__(self, "patches", tuple(ordered))
        if not self.max_height >= 0:
            raise ValueError("max_height must be >= 0")

    def patch_index(self, x) -> np.ndarray:
        """Index of the patch containing each x, -1 where none."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -1, dtype=int)
        for i, patch in enumerate(self.patches):
            out[patch.contains(x)] = i
        return out


def terrain_height(terrain: Terrain, x, y):
    """Ground height at (x, y); scalars in, scalar out, arrays broadcast."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    h = np.zeros(np.broadcast(xa, ya).shape)
    for patch in terrain.patches:
        plate = (
            patch.height
            + (xa - patch.x_start) * math.tan(math.radians(patch.pitch_deg))
            + (ya - patch.y_ref) * math.tan(math.radians(patch.roll_deg))
        )
        plate = np.clip(plate, 0.0, terrain.max_height)
        h = np.where(patch.contains(xa), plate, h)
    if h.ndim == 0:
        return float(h)
    return h


def terrain_from_records(records, max_height: float = DEFAULT_MAX_HEIGHT) -> Terrain:
    known = {"x_start", "x_end", "height", "pitch_deg", "roll_deg", "y_ref"}
    patches = []
    for i, rec in enumerate(records):
        unknown = set(rec) - known
        if unknown:
            raise ValueError(f"patch {i}: unknown keys {sorted(unknown)}")
        for key in ("x_start", "x_end"):
            if key not in rec:
                raise ValueError(f"patch {i}: missing required key {key!r}")
        patches.append(Patch(**{k: float(v) for k, v in rec.items()}))
    return Terrain(tuple(patches), float(max_height))


def load_terrain(path) -> Terrain:
    """Read a terrain file: optional ``max_height`` plus ``[[patch]]`` tables."""
    from .config import read_toml

    data = read_toml(Path(path))
    return terrain_from_records(data.get("patch", []), data.get("max_height", DEFAULT_MAX_HEIGHT))


def wedge(x_top: float, slope_deg: float, height: float = DEFAULT_MAX_HEIGHT) -> Patch:
    """Ramp rising from the ground to ``height`` and ending at ``x_top``."""
    length = height / math.tan(math.radians(slope_deg))
    return Patch(x_start=x_top - length, x_end=x_top, height=0.0, pitch_deg=slope_deg)
