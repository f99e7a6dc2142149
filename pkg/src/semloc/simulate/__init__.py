"""World generation and sensor simulation."""

from .presets import (
    default_world,
    hallway_world,
    preset_trajectory,
    preset_world,
    stability_worlds,
    twin_world,
)
from .run import SensorRates, TrajectorySpec, simulate_run
from .sensors import AgentSpec, SensorNoiseSpec, simulate_detections, simulate_scan
from .world import DoorSpec, ObjectSpec, RoomSpec, WorldSpec, generate_world

__all__ = [
    "AgentSpec",
    "DoorSpec",
    "ObjectSpec",
    "RoomSpec",
    "SensorNoiseSpec",
    "SensorRates",
    "TrajectorySpec",
    "WorldSpec",
    "default_world",
    "generate_world",
    "hallway_world",
    "preset_trajectory",
    "preset_world",
    "simulate_detections",
    "simulate_run",
    "simulate_scan",
    "stability_worlds",
    "twin_world",
]
