"""Observation likelihood models and detection geometry.

Two experts feed the particle filter: a beam-end LiDAR model that scores
each beam endpoint by its distance-field value, and a semantic model
that scores detected object bearings against the visibility index. Each
expert combines its components by geometric mean, so experts stay on a
comparable scale regardless of how many components they saw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import angle_diff, unit_vector, wrap_angle_2pi
from .worldmap.grid import DistanceField
from .worldmap.visibility import VisibilityIndex

LIKELIHOOD_FLOOR = 1e-9
D_MISS = 2.0


@dataclass
class LidarScan:
    """One planar scan; angles are beam azimuths in the robot frame."""

    timestamp: float
    angles: np.ndarray
    ranges: np.ndarray
    range_max: float
    valid: np.ndarray = None

    def __post_init__(self):
        self.angles = np.ascontiguousarray(self.angles, dtype=np.float64)
        self.ranges = np.ascontiguousarray(self.ranges, dtype=np.float64)
        if self.angles.shape != self.ranges.shape or self.angles.ndim != 1:
            raise ValueError("angles and ranges must be equal-length 1-d arrays")
        if self.valid is None:
            self.valid = np.ones(self.angles.shape, dtype=bool)
        else:
            self.valid = np.ascontiguousarray(self.valid, dtype=bool)
            if self.valid.shape != self.angles.shape:
                raise ValueError("validity mask length mismatch")
        # out-of-range returns are demoted to invalid rather than rejected
        self.valid = self.valid & (self.ranges > 0.0) & (self.ranges <= self.range_max)

    @property
    def beam_count(self) -> int:
        return self.angles.shape[0]


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera reduced to the ground plane.

    pose is (x, y, yaw) of the camera in the robot frame; only yaw
    matters for bearing math at floor-plan scale.
    """

    id: str
    fx: float
    cx: float
    width: int
    pose: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.fx <= 0.0:
            raise ValueError("fx must be positive")
        if not (0.0 <= self.cx < self.width):
            raise ValueError("cx must lie inside the image")

    @property
    def yaw(self) -> float:
        return float(self.pose[2])

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "fx": self.fx,
            "cx": self.cx,
            "width": self.width,
            "pose": list(self.pose),
        }

    @staticmethod
    def from_document(doc: dict) -> "CameraModel":
        return CameraModel(
            id=str(doc["id"]),
            fx=float(doc["fx"]),
            cx=float(doc["cx"]),
            width=int(doc["width"]),
            pose=tuple(float(v) for v in doc.get("pose", (0.0, 0.0, 0.0))),
        )


def default_cameras() -> list:
    """Four 90-degree cameras facing front, left, back, right."""
    out = []
    for i, yaw in enumerate((0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi)):
        out.append(
            CameraModel(
                id=f"cam{i}", fx=320.0, cx=320.0, width=640,
                pose=(0.0, 0.0, yaw),
            )
        )
    return out


@dataclass
class Detection:
    class_label: str
    confidence: float
    camera_id: str
    bb_left: float
    bb_right: float
    bearing: np.ndarray  # unit vector, robot frame
    half_angle: float

    @property
    def bearing_angle(self) -> float:
        return float(np.arctan2(self.bearing[1], self.bearing[0]))


@dataclass
class DetectionSet:
    timestamp: float
    detections: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.detections)

    def __len__(self):
        return len(self.detections)


def pixel_to_bearing(camera: CameraModel, pixel_column: float) -> np.ndarray:
    """Robot-frame unit bearing of an image column."""
    if not (0.0 <= pixel_column <= camera.width):
        raise ValueError(
            f"pixel column {pixel_column} outside image [0, {camera.width}]"
        )
    azimuth_cam = np.arctan((camera.cx - pixel_column) / camera.fx)
    return unit_vector(azimuth_cam + camera.yaw)


def camera_azimuth(camera: CameraModel, pixel_column: float) -> float:
    """Camera-frame azimuth of an image column (no extrinsics)."""
    if not (0.0 <= pixel_column <= camera.width):
        raise ValueError(
            f"pixel column {pixel_column} outside image [0, {camera.width}]"
        )
    return float(np.arctan((camera.cx - pixel_column) / camera.fx))


def detection_from_bbox(
    camera: CameraModel, class_label: str, confidence: float, bb_left: float, bb_right: float
) -> Detection:
    """Turn a bounding box into a bearing-cone detection.

    The bearing points at the bbox center column; the cone half-angle is
    half the angular span between the two edge columns.
    """
    if bb_left >= bb_right:
        raise ValueError("bb_left must be smaller than bb_right")
    az_left = camera_azimuth(camera, bb_left)
    az_right = camera_azimuth(camera, bb_right)
    center = camera_azimuth(camera, 0.5 * (bb_left + bb_right))
    return Detection(
        class_label=class_label,
        confidence=float(confidence),
        camera_id=camera.id,
        bb_left=float(bb_left),
        bb_right=float(bb_right),
        bearing=unit_vector(center + camera.yaw),
        half_angle=0.5 * abs(az_left - az_right),
    )


def beam_likelihood(endpoint, field: DistanceField, sigma_obs: float, sigma_norm=None):
    """Density of a beam endpoint under the beam-end model.

    Normalizer uses sigma unsquared, exponent uses sigma squared; both
    default to sigma_obs but the normalizer scale can be overridden.
    Vectorized over a trailing (..., 2) endpoint array; points off the
    map score at the truncation value r_max.
    """
    if sigma_obs <= 0.0:
        raise ValueError("sigma_obs must be positive")
    sn = sigma_obs if sigma_norm is None else sigma_norm
    pts = np.asarray(endpoint, dtype=float)
    e = field.value_at(pts[..., 0], pts[..., 1])
    return np.exp(-np.square(e) / (2.0 * sigma_obs**2)) / np.sqrt(2.0 * np.pi * sn)


def scan_log_likelihood(
    scan: LidarScan,
    poses: np.ndarray,
    field: DistanceField,
    sigma_obs: float,
    beam_stride: int = 10,
    sigma_norm=None,
    likelihood_floor: float = LIKELIHOOD_FLOOR,
) -> np.ndarray:
    """Log geometric-mean beam-end likelihood for a batch of poses.

    poses is (N, 3); every beam_stride-th valid beam contributes. With no
    valid beams every pose gets log(likelihood_floor).
    """
    if beam_stride < 1:
        raise ValueError("beam_stride must be >= 1")
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    sel = np.zeros(scan.beam_count, dtype=bool)
    sel[::beam_stride] = True
    sel &= scan.valid
    n = poses.shape[0]
    if not sel.any():
        return np.full(n, np.log(likelihood_floor))
    a = scan.angles[sel]
    r = scan.ranges[sel]
    beam_dir = poses[:, 2:3] + a[None, :]
    ex = poses[:, 0:1] + r[None, :] * np.cos(beam_dir)
    ey = poses[:, 1:2] + r[None, :] * np.sin(beam_dir)
    sn = sigma_obs if sigma_norm is None else sigma_norm
    e = field.value_at(ex, ey)
    log_p = -np.square(e) / (2.0 * sigma_obs**2) - 0.5 * np.log(2.0 * np.pi * sn)
    np.maximum(log_p, np.log(likelihood_floor), out=log_p)
    return log_p.mean(axis=1)


def scan_likelihood(
    scan: LidarScan,
    pose,
    field: DistanceField,
    sigma_obs: float,
    beam_stride: int = 10,
    sigma_norm=None,
) -> float:
    """Geometric mean of beam_likelihood over strided valid beams."""
    log_p = scan_log_likelihood(
        scan, np.asarray(pose, dtype=float), field, sigma_obs, beam_stride, sigma_norm
    )
    return float(np.exp(log_p[0]))


def semantic_distance(bearing_set: np.ndarray, observed: np.ndarray, d_miss: float = D_MISS) -> float:
    """Cosine distance between a detection bearing and its best match.

    bearing_set is (n, 2) unit vectors; empty sets cost d_miss.
    """
    b = np.asarray(bearing_set, dtype=float).reshape(-1, 2)
    if b.shape[0] == 0:
        return float(d_miss)
    return float(1.0 - np.max(b @ np.asarray(observed, dtype=float)))


def semantic_log_likelihood(
    detections: DetectionSet,
    poses: np.ndarray,
    index: VisibilityIndex,
    tau_conf: float,
    d_miss: float = D_MISS,
    likelihood_floor: float = LIKELIHOOD_FLOOR,
    vocabulary=None,
) -> np.ndarray:
    """Log geometric-mean semantic likelihood for a batch of poses.

    Detections below tau_conf or outside the vocabulary are ignored; with
    nothing left the result is neutral (log 1 = 0). Each confident
    detection contributes exp(-d) with d the cosine distance between its
    world-frame bearing and the nearest indexed bearing of its class at
    the pose's cell (d_miss when the class is invisible there).
    """
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    n = poses.shape[0]
    vocab = index.classes if vocabulary is None else tuple(vocabulary)
    confident = [
        d
        for d in detections
        if d.confidence >= tau_conf and d.class_label in vocab
    ]
    if not confident:
        return np.zeros(n)
    cell_ids = index.cell_ids(poses[:, 0], poses[:, 1])
    total = np.zeros(n)
    log_floor = np.log(likelihood_floor)
    for det in confident:
        q = wrap_angle_2pi(poses[:, 2] + det.bearing_angle)
        d = index.nearest_distances(det.class_label, cell_ids, q, d_miss)
        total += np.maximum(-d, log_floor)
    return total / len(confident)


def semantic_likelihood(
    detections: DetectionSet,
    pose,
    index: VisibilityIndex,
    tau_conf: float,
    d_miss: float = D_MISS,
    vocabulary=None,
) -> float:
    log_p = semantic_log_likelihood(
        detections, np.asarray(pose, dtype=float), index, tau_conf, d_miss,
        vocabulary=vocabulary,
    )
    return float(np.exp(log_p[0]))


def mask_dynamic_beams(
    scan: LidarScan, detections: DetectionSet, dynamic_classes
) -> LidarScan:
    """Invalidate beams falling inside any dynamic-class detection cone.

    Ranges are never modified; a scan with no dynamic detections comes
    back element-for-element identical.
    """
    dynamic = set(dynamic_classes)
    cones = [d for d in detections if d.class_label in dynamic] if detections else []
    valid = scan.valid.copy()
    for det in cones:
        off = np.abs(angle_diff(scan.angles, det.bearing_angle))
        valid &= off > det.half_angle
    return LidarScan(
        timestamp=scan.timestamp,
        angles=scan.angles.copy(),
        ranges=scan.ranges.copy(),
        range_max=scan.range_max,
        valid=valid,
    )
