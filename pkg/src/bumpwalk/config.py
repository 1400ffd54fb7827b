"""Scenario configuration: TOML files, built-in scenario defaults and validation.

A config file needs only ``scenario = "<id>"``; every other key falls back to
the scenario's defaults. Sections and keys (SI units, angles in degrees):

    scenario = "flat_1kmh"          # flat_1kmh | inclined_obstacles | step_in_place
    seed = 0

    [gait]      step_length, step_time, double_support_fraction, com_height,
                gravity, swing_apex_height, n_steps, hip_width,
                first_swing ("left"/"right"), initial_hold, final_hold
    [foot]      sensor_length, sensor_width, sole_half_length, sole_half_width,
                bump_range
    [control]   rate_hz, gain_set ("hardware"/"calibrated"), du_policy ("release"/"reset"/"decay")
    [control.layers]       force, bump, orientation, zmp_com  (booleans)
    [control.force]        kp, kr
    [control.bump]         kp, kr, s_on, s_off, sensor_offset
    [control.orientation]  kp, kr
    [control.zmp_com]      k_zmp, k_com   (hardware: 2*omega, 0.5*omega; calibrated: 1.1*omega, 0.9*omega)
    [control.clamps]       dz, du, dtheta
    [plant]     substeps, mass, tau_act, contact_stiffness, contact_damping,
                deflection, bump_noise, ft_noise
    [terrain]   max_height, file (path relative to the config), [[terrain.patch]]
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .gait import (
    GAIN_SETS,
    ZMP_COM_SCALES,
    BumpWindow,
    Clamps,
    ControlParams,
    FootGeometry,
    GaitParams,
    Gains,
    ZmpComGains,
    side_index,
)
from .terrain import DEFAULT_MAX_HEIGHT, Terrain, terrain_from_records, wedge

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCENARIO_IDS = ("flat_1kmh", "inclined_obstacles", "step_in_place")
LAYERS = ("force", "bump", "orientation", "zmp_com")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LayerFlags:
    force: bool = True
    bump: bool = True
    orientation: bool = True
    zmp_com: bool = True

    def with_layer(self, name: str, enabled: bool) -> "LayerFlags":
        if name not in LAYERS:
            raise ConfigError(f"unknown controller layer {name!r}; expected one of {LAYERS}")
        return replace(self, **{name: enabled})

    def as_dict(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in LAYERS}


@dataclass(frozen=True)
class PlantParams:
    substeps: int = 5
    mass: float = 50.0
    tau_act: float = 0.02
    contact_stiffness: float = 2e5
    contact_damping: float = 500.0
    deflection: float = 0.005
    bump_noise: float = 0.0
    ft_noise: float = 0.0

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError(f"substeps must be an integer >= 1, got {self.substeps}")
        for name in ("mass", "tau_act", "contact_stiffness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("contact_damping", "bump_noise", "ft_noise"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not math.isfinite(self.deflection):
            raise ValueError("deflection must be finite")


@dataclass(frozen=True)
class Scenario:
    id: str = "flat_1kmh"
    gait: GaitParams = field(default_factory=GaitParams)
    foot: FootGeometry = field(default_factory=FootGeometry)
    control: ControlParams = field(default_factory=ControlParams)
    plant: PlantParams = field(default_factory=PlantParams)
    terrain: Terrain = field(default_factory=Terrain)
    layers: LayerFlags = field(default_factory=LayerFlags)
    seed: int = 0

    @property
    def weight(self) -> float:
        return self.plant.mass * self.gait.gravity

    @property
    def zmp_com_gains(self) -> ZmpComGains:
        return self.control.zmp_com_gains(self.gait.omega)

    def header(self) -> dict[str, object]:
        """Flat description of the run, echoed into telemetry headers."""
        g = self.gait
        zc = self.zmp_com_gains
        out: dict[str, object] = {
            "scenario": self.id,
            "seed": self.seed,
            "step_length": g.step_length,
            "step_time": g.step_time,
            "double_support_fraction": g.double_support_fraction,
            "com_height": g.com_height,
            "omega": g.omega,
            "n_steps": g.n_steps,
            "rate_hz": self.control.rate_hz,
            "substeps": self.plant.substeps,
            "deflection": self.plant.deflection,
            "mass": self.plant.mass,
        }
        for name in ("force", "bump", "orientation"):
            gains = getattr(self.control, name)
            out[f"{name}_kp"] = gains.kp
            out[f"{name}_kr"] = gains.kr
        out["zmp_com_k_zmp"] = zc.k_zmp
        out["zmp_com_k_com"] = zc.k_com
        for name, on in self.layers.as_dict().items():
            out[f"layer_{name}"] = on
        return out


def inclined_obstacle_terrain(step_length: float = 0.25, foot_half_length: float = 0.05) -> Terrain:
    """Two unseen wedges (7 and 12 degrees, 2.5 cm tall) under footholds 3 and 6."""
    margin = foot_half_length + 0.01
    return Terrain(
        (
            wedge(3 * step_length + margin, 7.0),
            wedge(6 * step_length + margin, 12.0),
        ),
        DEFAULT_MAX_HEIGHT,
    )


def scenario_defaults(scenario_id: str) -> Scenario:
    if scenario_id == "flat_1kmh":
        return Scenario(id=scenario_id, gait=GaitParams(n_steps=10))
    if scenario_id == "inclined_obstacles":
        return Scenario(
            id=scenario_id,
            gait=GaitParams(n_steps=8),
            terrain=inclined_obstacle_terrain(),
        )
    if scenario_id == "step_in_place":
        return Scenario(id=scenario_id, gait=GaitParams(step_length=0.0, n_steps=6))
    raise ConfigError(f"unknown scenario id {scenario_id!r}; expected one of {SCENARIO_IDS}")


def read_toml(path: Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # message carries "(at line N, column M)"
        raise ConfigError(f"{path}: parse error: {exc}") from exc


def _take(section: dict, allowed, where: str) -> dict:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"[{where}] unknown keys: {sorted(unknown)}")
    return dict(section)


def _build(cls, base, values: dict, where: str):
    try:
        return replace(base, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from exc


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    top = _take(
        data, ("scenario", "seed", "gait", "foot", "control", "plant", "terrain"), "top level"
    )
    if "scenario" not in top:
        raise ConfigError("missing required key 'scenario'")
    sc = scenario_defaults(str(top["scenario"]))

    gait_vals = _take(_section(top, "gait"), [f.name for f in fields(GaitParams)], "gait")
    if "first_swing" in gait_vals:
        try:
            gait_vals["first_swing"] = side_index(gait_vals["first_swing"])
        except ValueError as exc:
            raise ConfigError(f"[gait] first_swing: {exc}") from exc
    gait = _build(GaitParams, sc.gait, gait_vals, "gait")

    foot_vals = _take(_section(top, "foot"), [f.name for f in fields(FootGeometry)], "foot")
    foot = _build(FootGeometry, sc.foot, foot_vals, "foot")

    ctrl = _take(
        _section(top, "control"),
        ("rate_hz", "gain_set", "du_policy", "layers", "force", "bump", "orientation",
         "zmp_com", "clamps"),
        "control",
    )
    gain_set = ctrl.pop("gain_set", "hardware")
    if gain_set not in GAIN_SETS:
        raise ConfigError(f"[control] gain_set must be one of {sorted(GAIN_SETS)}, got {gain_set!r}")
    base_gains = GAIN_SETS[gain_set]
    control_kwargs: dict[str, object] = {}
    window = BumpWindow()
    for name in ("force", "bump", "orientation"):
        sec = ctrl.pop(name, {})
        extra = ("s_on", "s_off", "sensor_offset") if name == "bump" else ()
        sec = _take(sec, ("kp", "kr") + extra, f"control.{name}")
        win = {k: sec.pop(k) for k in extra if k in sec}
        if win:
            window = _build(BumpWindow, window, win, "control.bump")
        control_kwargs[name] = _build(Gains, base_gains[name], sec, f"control.{name}")
    sec = _take(ctrl.pop("zmp_com", {}), ("k_zmp", "k_com"), "control.zmp_com")
    control_kwargs["zmp_com"] = _build(
        ZmpComGains, ZmpComGains.scaled(gait.omega, *ZMP_COM_SCALES[gain_set]), sec,
        "control.zmp_com",
    )
    clamps = _take(ctrl.pop("clamps", {}), [f.name for f in fields(Clamps)], "control.clamps")
    control_kwargs["clamps"] = _build(Clamps, Clamps(), clamps, "control.clamps")
    layer_vals = _take(ctrl.pop("layers", {}), LAYERS, "control.layers")
    layers = _build(LayerFlags, sc.layers, {k: bool(v) for k, v in layer_vals.items()},
                    "control.layers")
    control_kwargs["window"] = window
    control_kwargs.update(ctrl)
    control = _build(ControlParams, ControlParams(), control_kwargs, "control")

    plant_vals = _take(_section(top, "plant"), [f.name for f in fields(PlantParams)], "plant")
    plant = _build(PlantParams, sc.plant, plant_vals, "plant")

    terrain = sc.terrain
    if "terrain" in top:
        tsec = _take(_section(top, "terrain"), ("max_height", "file", "patch"), "terrain")
        max_h = tsec.get("max_height", terrain.max_height)
        try:
            if "file" in tsec:
                tpath = Path(tsec["file"])
                if not tpath.is_absolute() and base_dir is not None:
                    tpath = base_dir / tpath
                tdata = read_toml(tpath)
                terrain = terrain_from_records(
                    tdata.get("patch", []), tdata.get("max_height", max_h)
                )
            elif "patch" in tsec:
                terrain = terrain_from_records(tsec["patch"], max_h)
            else:
                terrain = Terrain(terrain.patches, float(max_h))
        except ValueError as exc:
            raise ConfigError(f"[terrain] {exc}") from exc

    seed = top.get("seed", 0)
    if int(seed) != seed or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed}")
    return Scenario(
        id=sc.id, gait=gait, foot=foot, control=control, plant=plant,
        terrain=terrain, layers=layers, seed=int(seed),
    )


def load_config(path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(read_toml(path), base_dir=path.parent)
