"""Newline-delimited JSON log files.

Two file kinds share the conventions here: sensor logs (header line
followed by ground truth, odometry, scan, and detection records in
timestamp order) and estimate logs (header line followed by pose
estimates). All writes use canonical JSON (sorted keys, no spaces) so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .mclcore import OdometryDelta, PoseEstimate
from .sensormodels import CameraModel, DetectionSet, LidarScan, detection_from_bbox

SENSOR_LOG_VERSION = 1
ESTIMATE_LOG_VERSION = 1

# sort order for simultaneous records; consumers rely on motion being
# applied before the sensors that observed the moved robot
KIND_ORDER = {"gt": 0, "odom": 1, "scan": 2, "detections": 3}


class LogFormatError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def hash_grid(grid) -> str:
    return hashlib.sha256(grid.content_key()).hexdigest()


def hash_semantic(smap) -> str:
    return hashlib.sha256(smap.content_key()).hexdigest()


@dataclass
class SensorLog:
    """Parsed sensor log: a header document plus (t, kind, payload)
    records where payload is an ndarray pose for "gt", an OdometryDelta,
    a LidarScan, or a DetectionSet."""

    header: dict
    records: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def cameras(self) -> list:
        return [CameraModel.from_document(d) for d in self.header.get("cameras", [])]

    def gt_array(self) -> np.ndarray:
        """(n, 4) array of [t, x, y, theta] ground-truth rows."""
        rows = [(t, p[0], p[1], p[2]) for t, kind, p in self.records if kind == "gt"]
        if not rows:
            return np.zeros((0, 4))
        return np.asarray(rows, dtype=np.float64)

    def duration(self) -> float:
        if not self.records:
            return 0.0
        return float(self.records[-1][0] - self.records[0][0])


def _scan_document(t: float, scan: LidarScan) -> dict:
    angles = np.asarray(scan.angles, dtype=float)
    if angles.shape[0] > 1:
        steps = np.diff(angles)
        step = float(steps[0])
        if not np.allclose(steps, step, atol=1e-9):
            raise LogFormatError("scan log requires uniformly spaced beams")
    else:
        step = 0.0
    return {
        "type": "scan",
        "t": t,
        "angle_min": float(angles[0]),
        "angle_step": step,
        "range_max": float(scan.range_max),
        "ranges": [float(r) for r in scan.ranges],
        "valid": [int(v) for v in scan.valid],
    }


def _detections_document(t: float, dets: DetectionSet) -> dict:
    items = []
    for d in dets:
        items.append(
            {
                "class": d.class_label,
                "confidence": float(d.confidence),
                "camera": d.camera_id,
                "bb_left": float(d.bb_left),
                "bb_right": float(d.bb_right),
            }
        )
    return {"type": "detections", "t": t, "items": items}


def write_sensor_log(log: SensorLog, path) -> None:
    header = dict(log.header)
    header.setdefault("type", "sensor_log")
    header.setdefault("version", SENSOR_LOG_VERSION)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for t, kind, payload in log.records:
            t = float(t)
            if kind == "gt":
                doc = {"type": "gt", "t": t, "pose": [float(v) for v in payload]}
            elif kind == "odom":
                doc = {
                    "type": "odom",
                    "t": t,
                    "delta": [payload.dx, payload.dy, payload.dtheta],
                }
            elif kind == "scan":
                doc = _scan_document(t, payload)
            elif kind == "detections":
                doc = _detections_document(t, payload)
            else:
                raise LogFormatError(f"unknown record kind {kind!r}")
            fh.write(_dumps(doc) + "\n")


def _parse_scan(doc: dict) -> LidarScan:
    ranges = np.asarray(doc["ranges"], dtype=np.float64)
    n = ranges.shape[0]
    angles = float(doc["angle_min"]) + np.arange(n) * float(doc["angle_step"])
    return LidarScan(
        timestamp=float(doc["t"]),
        angles=angles,
        ranges=ranges,
        range_max=float(doc["range_max"]),
        valid=np.asarray(doc["valid"], dtype=bool),
    )


def _parse_detections(doc: dict, cameras_by_id: dict) -> DetectionSet:
    out = []
    for item in doc["items"]:
        cam = cameras_by_id.get(item["camera"])
        if cam is None:
            raise LogFormatError(f"detection references unknown camera {item['camera']!r}")
        out.append(
            detection_from_bbox(
                cam,
                str(item["class"]),
                float(item["confidence"]),
                float(item["bb_left"]),
                float(item["bb_right"]),
            )
        )
    return DetectionSet(timestamp=float(doc["t"]), detections=out)


def read_sensor_log(path) -> SensorLog:
    """Parse a sensor log; malformed lines raise LogFormatError naming
    the offending record."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise LogFormatError("empty log file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("type") != "sensor_log":
        raise LogFormatError("first record must be a sensor_log header")
    version = header.get("version")
    if version != SENSOR_LOG_VERSION:
        raise LogFormatError(f"unsupported sensor log version {version!r}")
    cameras_by_id = {c.id: c for c in (CameraModel.from_document(d) for d in header.get("cameras", []))}

    records = []
    last_t = -np.inf
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
            kind = doc["type"]
            t = float(doc["t"])
            if kind == "gt":
                pose = np.asarray(doc["pose"], dtype=np.float64)
                if pose.shape != (3,):
                    raise LogFormatError("gt pose must have three components")
                payload = pose
            elif kind == "odom":
                dx, dy, dth = (float(v) for v in doc["delta"])
                payload = OdometryDelta(timestamp=t, dx=dx, dy=dy, dtheta=dth)
            elif kind == "scan":
                payload = _parse_scan(doc)
            elif kind == "detections":
                payload = _parse_detections(doc, cameras_by_id)
            else:
                raise LogFormatError(f"unknown record kind {kind!r}")
        except LogFormatError as exc:
            raise LogFormatError(f"record at line {lineno}: {exc}") from exc
        except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise LogFormatError(f"record at line {lineno}: {exc}") from exc
        if t < last_t:
            raise LogFormatError(f"record at line {lineno}: timestamps go backwards")
        last_t = t
        records.append((t, kind, payload))
    return SensorLog(header=header, records=records)


def write_estimates(path, estimates, meta: dict = None) -> None:
    header = {"type": "estimate_log", "version": ESTIMATE_LOG_VERSION}
    if meta:
        header.update(meta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for est in estimates:
            doc = {
                "t": float(est.timestamp),
                "pose": [float(v) for v in est.pose],
                "cov_xy": [[float(v) for v in row] for row in est.cov_xy],
                "theta_spread": float(est.theta_spread),
            }
            fh.write(_dumps(doc) + "\n")


def read_estimates(path):
    """Returns (header, list[PoseEstimate])."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise LogFormatError("empty estimate file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("type") != "estimate_log":
        raise LogFormatError("first record must be an estimate_log header")
    out = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
            est = PoseEstimate(
                pose=tuple(float(v) for v in doc["pose"]),
                cov_xy=np.asarray(doc["cov_xy"], dtype=np.float64),
                theta_spread=float(doc["theta_spread"]),
                timestamp=float(doc["t"]),
            )
        except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise LogFormatError(f"record at line {lineno}: {exc}") from exc
        out.append(est)
    return header, out
