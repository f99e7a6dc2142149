"""Semantic Monte Carlo localization for planar robots in sparse
floor-plan maps.

The pipeline: an occupancy grid plus a truncated Euclidean distance
field scores LiDAR endpoints; a precomputed per-cell visibility index of
semantic object bearings scores camera detections; a particle filter
fuses both experts, optionally bootstrapped by a room-category
classifier; a simulator and replay harness close the loop.
"""

from .evaluate import ConvergenceCriteria, EvalReport, aggregate, evaluate
from .geometry import Rect, angle_diff, wrap_angle, wrap_angle_2pi
from .logio import SensorLog, read_sensor_log, write_sensor_log
from .mclcore import (
    FilterConfig,
    LocalizationFilter,
    OdometryDelta,
    ParticleSet,
    PoseEstimate,
    effective_sample_size,
    low_variance_resample,
)
from .replay import replay_log
from .semantics import (
    RoomClassifier,
    StabilityReport,
    build_feature_vector,
    classify_room,
    stability_scores,
    stable_class_set,
)
from .sensormodels import (
    CameraModel,
    Detection,
    DetectionSet,
    LidarScan,
    beam_likelihood,
    mask_dynamic_beams,
    scan_likelihood,
    semantic_distance,
    semantic_likelihood,
)
from .worldmap import (
    DistanceField,
    OccupancyGrid,
    SemanticWorldMap,
    VisibilityIndex,
    build_visibility_index,
    compute_distance_field,
    query_visibility,
)

__version__ = "0.1.0"

__all__ = [
    "CameraModel",
    "ConvergenceCriteria",
    "Detection",
    "DetectionSet",
    "DistanceField",
    "EvalReport",
    "FilterConfig",
    "LidarScan",
    "LocalizationFilter",
    "OccupancyGrid",
    "OdometryDelta",
    "ParticleSet",
    "PoseEstimate",
    "Rect",
    "RoomClassifier",
    "SemanticWorldMap",
    "SensorLog",
    "StabilityReport",
    "VisibilityIndex",
    "aggregate",
    "angle_diff",
    "beam_likelihood",
    "build_feature_vector",
    "build_visibility_index",
    "classify_room",
    "compute_distance_field",
    "effective_sample_size",
    "evaluate",
    "low_variance_resample",
    "mask_dynamic_beams",
    "query_visibility",
    "read_sensor_log",
    "replay_log",
    "scan_likelihood",
    "semantic_distance",
    "semantic_likelihood",
    "stability_scores",
    "stable_class_set",
    "wrap_angle",
    "wrap_angle_2pi",
    "write_sensor_log",
]
