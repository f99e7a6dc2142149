"""Run configuration documents.

Every command-line entry point reads one JSON document whose sections
map onto the library's dataclasses: world, trajectory, filter, cameras,
noise, rates, criteria, index, classifier, seed(s). Worlds and
trajectories may either name a preset or spell the spec out inline.
"""

from __future__ import annotations

import dataclasses
import json
from importlib import resources

from .evaluate import ConvergenceCriteria
from .mclcore import FilterConfig
from .semantics import RoomClassifier
from .sensormodels import CameraModel, default_cameras
from .simulate.presets import preset_trajectory, preset_world
from .simulate.run import SensorRates, TrajectorySpec
from .simulate.sensors import SensorNoiseSpec
from .simulate.world import WorldSpec, generate_world

TRAINING_RESOURCE = "room_training.json"


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    return doc


def world_spec_from_config(cfg: dict) -> WorldSpec:
    section = cfg.get("world", {"preset": "default"})
    if "preset" in section:
        return preset_world(section["preset"])
    try:
        return WorldSpec.from_document(section)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid world section: {exc}") from exc


def build_world_from_config(cfg: dict):
    """(grid, semantic map) for the configured world."""
    return generate_world(world_spec_from_config(cfg))


def trajectory_from_config(cfg: dict) -> TrajectorySpec:
    section = cfg.get("trajectory")
    if section is None:
        raise ConfigError("configuration has no trajectory section")
    if "preset" in section:
        return preset_trajectory(section["preset"])
    try:
        return TrajectorySpec.from_document(section)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid trajectory section: {exc}") from exc


_TUPLE_FIELDS = {"sigma_odom", "init_pose", "init_sigma"}


def filter_from_config(cfg: dict) -> FilterConfig:
    section = dict(cfg.get("filter", {}))
    known = {f.name for f in dataclasses.fields(FilterConfig)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown filter options: {sorted(unknown)}")
    for key in _TUPLE_FIELDS & set(section):
        if section[key] is not None:
            section[key] = tuple(float(v) for v in section[key])
    try:
        return FilterConfig(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid filter section: {exc}") from exc


def cameras_from_config(cfg: dict) -> list:
    section = cfg.get("cameras")
    if section is None:
        return default_cameras()
    try:
        return [CameraModel.from_document(d) for d in section]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid cameras section: {exc}") from exc


def noise_from_config(cfg: dict) -> SensorNoiseSpec:
    try:
        return SensorNoiseSpec.from_document(cfg.get("noise", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid noise section: {exc}") from exc


def rates_from_config(cfg: dict) -> SensorRates:
    try:
        return SensorRates.from_document(cfg.get("rates", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid rates section: {exc}") from exc


def criteria_from_config(cfg: dict) -> ConvergenceCriteria:
    try:
        return ConvergenceCriteria.from_document(cfg.get("criteria", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid criteria section: {exc}") from exc


def index_options_from_config(cfg: dict) -> dict:
    """{'angular_resolution', 'excluded_classes', 'cache'} with defaults."""
    section = dict(cfg.get("index", {}))
    out = {
        "angular_resolution": float(section.pop("angular_resolution", 0.017453292519943295)),
        "excluded_classes": section.pop("excluded_classes", None),
        "cache": section.pop("cache", None),
    }
    if section:
        raise ConfigError(f"unknown index options: {sorted(section)}")
    if out["excluded_classes"] is not None:
        out["excluded_classes"] = tuple(str(c) for c in out["excluded_classes"])
    return out


def seeds_from_config(cfg: dict, default=(0,)) -> list:
    if "seeds" in cfg:
        return [int(s) for s in cfg["seeds"]]
    return [int(cfg.get("seed", default[0]))]


def load_default_training_rows() -> list:
    data = resources.files("semloc").joinpath("data").joinpath(TRAINING_RESOURCE)
    return json.loads(data.read_text(encoding="utf-8"))


def classifier_from_config(cfg: dict, vocabulary) -> RoomClassifier:
    """Trained room classifier; a `classifier` key names a JSON training
    file, otherwise the packaged training rows load."""
    path = cfg.get("classifier")
    if path is None:
        rows = load_default_training_rows()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
    k = int(cfg.get("classifier_k", 1))
    return RoomClassifier.from_document(rows, vocabulary, k=k)
