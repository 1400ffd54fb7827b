"""Biped gait planning with force, bump-sensor and ankle-orientation adaptation on a desk-scale plant."""

from .config import ConfigError, LayerFlags, PlantParams, Scenario, load_config, scenario_defaults
from .controllers import AdaptationLoop, AdaptationState, ModifiedCommand, leaky_step
from .distributor import DesiredFootForces, distribute_vertical_force
from .gait import (
    CALIBRATED_GAINS,
    HARDWARE_GAINS,
    ControlParams,
    FootGeometry,
    GaitParams,
    GaitPhase,
    Gains,
    Mode,
    advance_phase,
)
from .harness import RunResult, apply_overrides, run_scenario, simulate
from .metrics import RunMetrics, compare_runs, compute_metrics, read_telemetry
from .planner import WalkPlan, plan_walk
from .plant import PlantFault
from .terrain import Patch, Terrain, terrain_height

__version__ = "0.1.0"

__all__ = [
    "AdaptationLoop", "AdaptationState", "CALIBRATED_GAINS", "ConfigError", "ControlParams",
    "DesiredFootForces", "FootGeometry", "GaitParams", "GaitPhase", "Gains", "LayerFlags", "Mode",
    "ModifiedCommand", "Patch", "PlantFault", "PlantParams", "RunMetrics", "RunResult", "Scenario",
    "HARDWARE_GAINS", "Terrain", "WalkPlan", "advance_phase", "apply_overrides", "compare_runs",
    "compute_metrics", "distribute_vertical_force", "leaky_step", "load_config", "plan_walk",
    "read_telemetry", "run_scenario", "scenario_defaults", "simulate", "terrain_height",
]
