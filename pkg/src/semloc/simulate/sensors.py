"""Synthetic sensing: ray-cast LiDAR and bearing-space detections.

Detections are generated directly from the visibility index (so the
simulator and the observation model agree about what can be seen) and
only then converted to synthetic bounding-box columns, exercising the
same pixel-to-bearing path the consumer uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import angle_diff
from ..sensormodels import DetectionSet, LidarScan, detection_from_bbox
from ..worldmap import _march
from ..worldmap.grid import FREE, OccupancyGrid
from ..worldmap.visibility import VisibilityIndex


@dataclass
class SensorNoiseSpec:
    """All synthetic-sensor noise magnitudes in one place.

    Odometry drift values are diffusion scales: traveling one meter adds
    zero-mean noise with that standard deviation (per translation
    component, and to heading), turning one radian likewise for heading.
    """

    lidar_range_sigma: float = 0.01
    odom_drift_per_m: float = 0.01
    odom_drift_per_rad: float = 0.01
    detection_bearing_sigma: float = 0.02
    detection_miss_prob: float = 0.1
    false_positive_rate: float = 0.05
    confidence_tp: tuple = (0.85, 0.1)
    confidence_fp: tuple = (0.4, 0.15)

    def __post_init__(self):
        for name in ("detection_miss_prob",):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        for name in (
            "lidar_range_sigma",
            "odom_drift_per_m",
            "odom_drift_per_rad",
            "detection_bearing_sigma",
            "false_positive_rate",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    def to_document(self) -> dict:
        return {
            "lidar_range_sigma": self.lidar_range_sigma,
            "odom_drift_per_m": self.odom_drift_per_m,
            "odom_drift_per_rad": self.odom_drift_per_rad,
            "detection_bearing_sigma": self.detection_bearing_sigma,
            "detection_miss_prob": self.detection_miss_prob,
            "false_positive_rate": self.false_positive_rate,
            "confidence_tp": list(self.confidence_tp),
            "confidence_fp": list(self.confidence_fp),
        }

    @staticmethod
    def from_document(doc: dict) -> "SensorNoiseSpec":
        base = SensorNoiseSpec()
        kwargs = {}
        for key in base.to_document():
            if key in doc:
                val = doc[key]
                kwargs[key] = tuple(val) if key.startswith("confidence") else float(val)
        return SensorNoiseSpec(**kwargs)


@dataclass
class AgentSpec:
    """A scripted dynamic disk (a walking person) on a waypoint path."""

    waypoints: list
    speed: float = 0.5
    radius: float = 0.25
    loop: bool = True
    class_label: str = "person"

    def to_document(self) -> dict:
        return {
            "waypoints": [list(map(float, p)) for p in self.waypoints],
            "speed": self.speed,
            "radius": self.radius,
            "loop": self.loop,
            "class": self.class_label,
        }

    @staticmethod
    def from_document(doc: dict) -> "AgentSpec":
        return AgentSpec(
            waypoints=[tuple(float(v) for v in p) for p in doc["waypoints"]],
            speed=float(doc.get("speed", 0.5)),
            radius=float(doc.get("radius", 0.25)),
            loop=bool(doc.get("loop", True)),
            class_label=str(doc.get("class", "person")),
        )

    def position_at(self, t: float) -> np.ndarray:
        pts = np.asarray(self.waypoints, dtype=float)
        if pts.shape[0] == 1:
            return pts[0].copy()
        segs = np.diff(pts, axis=0)
        seg_len = np.hypot(segs[:, 0], segs[:, 1])
        if self.loop:
            # walk the path forward, then back, repeatedly
            path = np.concatenate([seg_len, seg_len[::-1]])
            pts_fwd = np.concatenate([pts, pts[-2::-1]], axis=0)
        else:
            path = seg_len
            pts_fwd = pts
        total = path.sum()
        s = (self.speed * t) % total if self.loop else min(self.speed * t, total)
        cum = np.concatenate([[0.0], np.cumsum(path)])
        i = int(np.searchsorted(cum[1:], s, side="right"))
        i = min(i, len(path) - 1)
        frac = (s - cum[i]) / path[i] if path[i] > 0 else 0.0
        return pts_fwd[i] + frac * (pts_fwd[i + 1] - pts_fwd[i])


def _ray_disk_ranges(origin, angles, center, radius):
    """Distance along each ray to the near intersection with a disk,
    inf where the ray misses. Vectorized over angles."""
    rel = np.asarray(center, dtype=float) - np.asarray(origin, dtype=float)
    dx = np.cos(angles)
    dy = np.sin(angles)
    proj = rel[0] * dx + rel[1] * dy
    perp2 = float(rel @ rel) - proj**2
    hit = (perp2 <= radius**2) & (proj > 0.0)
    t = np.full(angles.shape, np.inf)
    root = np.sqrt(np.maximum(radius**2 - perp2, 0.0))
    near = proj - root
    t[hit & (near > 0.0)] = near[hit & (near > 0.0)]
    return t


def simulate_scan(
    grid: OccupancyGrid,
    pose,
    beam_count: int,
    fov: float,
    range_max: float,
    noise: SensorNoiseSpec,
    rng: np.random.Generator,
    agents=(),
    agent_positions=None,
) -> LidarScan:
    """First-hit ranges by marching the grid at half-cell steps.

    Beams that reach unknown space, leave the map, or exceed range_max
    report range_max and invalid. Scripted agents add short returns via
    exact ray-disk intersection. Gaussian range noise is applied to
    valid returns only and clipped into (0, range_max].
    """
    x, y, th = (float(v) for v in np.asarray(pose, dtype=float))
    row, col = grid.world_to_cell(x, y)
    if not grid.in_bounds(row, col) or grid.cells[int(row), int(col)] != FREE:
        raise ValueError(f"scan pose ({x:.2f}, {y:.2f}) is not in free space")
    if beam_count < 1:
        raise ValueError("beam_count must be >= 1")
    if beam_count == 1:
        rel_angles = np.zeros(1)
    else:
        rel_angles = -0.5 * fov + np.arange(beam_count) * (fov / (beam_count - 1))
    world_angles = th + rel_angles
    ranges = np.empty(beam_count, dtype=np.float64)
    valid8 = np.zeros(beam_count, dtype=np.uint8)
    ox, oy, oth = grid.origin
    if abs(oth) > 1e-12:
        raise ValueError("simulate_scan requires an axis-aligned grid")
    _march.cast_scan(
        grid.cells, grid.resolution, x - ox, y - oy,
        np.ascontiguousarray(world_angles), float(range_max), ranges, valid8,
    )
    valid = valid8.astype(bool)
    for i, agent in enumerate(agents):
        center = agent_positions[i] if agent_positions is not None else None
        if center is None:
            continue
        t = _ray_disk_ranges((x, y), world_angles, center, agent.radius)
        closer = t < ranges
        ranges = np.where(closer, t, ranges)
        valid |= closer & (t <= range_max)
    if noise.lidar_range_sigma > 0.0:
        bump = rng.normal(0.0, noise.lidar_range_sigma, size=beam_count)
        ranges = np.where(valid, np.clip(ranges + bump, 1e-6, range_max), ranges)
    return LidarScan(
        timestamp=0.0,
        angles=rel_angles,
        ranges=ranges,
        range_max=range_max,
        valid=valid,
    )


def _camera_half_fov(camera) -> float:
    return float(
        0.5
        * (
            np.arctan(camera.cx / camera.fx)
            + np.arctan((camera.width - camera.cx) / camera.fx)
        )
    )


def _bbox_from_cone(camera, az_cam: float, half_angle: float):
    """Synthetic bbox columns for a cone in camera frame, or None if the
    projection falls outside the image."""
    lo = az_cam - half_angle
    hi = az_cam + half_angle
    limit = 0.5 * np.pi * 0.98
    if abs(lo) >= limit or abs(hi) >= limit:
        return None
    bb_left = camera.cx - camera.fx * np.tan(hi)
    bb_right = camera.cx - camera.fx * np.tan(lo)
    bb_left = float(np.clip(bb_left, 0.0, camera.width))
    bb_right = float(np.clip(bb_right, 0.0, camera.width))
    if bb_right - bb_left < 1.0:
        mid = 0.5 * (bb_left + bb_right)
        bb_left = float(np.clip(mid - 0.5, 0.0, camera.width - 1.0))
        bb_right = bb_left + 1.0
    return bb_left, bb_right


def _clipped_normal(rng, mean, sigma):
    return float(np.clip(rng.normal(mean, sigma), 0.0, 1.0))


def simulate_detections(
    index: VisibilityIndex,
    smap,
    pose,
    cameras,
    noise: SensorNoiseSpec,
    rng: np.random.Generator,
    agents=(),
    agent_positions=None,
    grid: OccupancyGrid = None,
    timestamp: float = 0.0,
) -> DetectionSet:
    """One detection frame from the true pose.

    For every camera and indexed class with visible bearings inside the
    camera FOV: with probability 1 - miss, pick one visible bearing,
    perturb it, and emit a detection whose bbox back-projects to the
    perturbed cone. Scripted agents contribute detections of their own
    class when line-of-sight holds (requires `grid`). False positives
    are Poisson per frame with uniform class and bearing.
    """
    x, y, th = (float(v) for v in np.asarray(pose, dtype=float))
    out = []
    for cam in cameras:
        half_fov = _camera_half_fov(cam)
        for class_label in index.classes:
            angles = index.bearing_angles_at(x, y, class_label)
            if angles.shape[0] == 0:
                continue
            rel = angle_diff(angles, th)
            cam_rel = angle_diff(rel, cam.yaw)
            inside = np.abs(cam_rel) <= half_fov - 0.03
            if not inside.any():
                continue
            if rng.random() < noise.detection_miss_prob:
                continue
            cand = np.nonzero(inside)[0]
            pick = cand[int(rng.integers(0, cand.shape[0]))]
            true_cam_az = float(cam_rel[pick])
            world_ang = float(angles[pick])
            half_angle = _object_half_angle(smap, class_label, (x, y), world_ang)
            az = true_cam_az + float(rng.normal(0.0, noise.detection_bearing_sigma))
            bbox = _bbox_from_cone(cam, az, half_angle)
            if bbox is None:
                continue
            conf = _clipped_normal(rng, *noise.confidence_tp)
            out.append(detection_from_bbox(cam, class_label, conf, *bbox))
    if agents and agent_positions is not None and grid is not None:
        for cam in cameras:
            half_fov = _camera_half_fov(cam)
            for agent, center in zip(agents, agent_positions):
                if center is None:
                    continue
                d = np.hypot(center[0] - x, center[1] - y)
                if d < 1e-6:
                    continue
                if not _segment_clear(grid, (x, y), center, d):
                    continue
                world_ang = np.arctan2(center[1] - y, center[0] - x)
                cam_az = float(angle_diff(angle_diff(world_ang, th), cam.yaw))
                half_angle = float(np.arctan(agent.radius / d))
                if abs(cam_az) > half_fov - 0.03:
                    continue
                if rng.random() < noise.detection_miss_prob:
                    continue
                az = cam_az + float(rng.normal(0.0, noise.detection_bearing_sigma))
                bbox = _bbox_from_cone(cam, az, half_angle)
                if bbox is None:
                    continue
                conf = _clipped_normal(rng, *noise.confidence_tp)
                out.append(detection_from_bbox(cam, agent.class_label, conf, *bbox))
    if noise.false_positive_rate > 0.0:
        for _ in range(int(rng.poisson(noise.false_positive_rate))):
            cam = cameras[int(rng.integers(0, len(cameras)))]
            label = smap.class_vocabulary[
                int(rng.integers(0, len(smap.class_vocabulary)))
            ]
            half_fov = _camera_half_fov(cam)
            az = float(rng.uniform(-half_fov + 0.05, half_fov - 0.05))
            half_angle = float(rng.uniform(0.02, 0.1))
            bbox = _bbox_from_cone(cam, az, half_angle)
            if bbox is None:
                continue
            conf = _clipped_normal(rng, *noise.confidence_fp)
            out.append(detection_from_bbox(cam, label, conf, *bbox))
    return DetectionSet(timestamp=timestamp, detections=out)


def _object_half_angle(smap, class_label: str, origin, world_angle: float) -> float:
    """Apparent half-angle of the nearest object of the class whose
    center bearing best matches the chosen direction."""
    best = None
    bx, by = origin
    for obj in smap.objects_of_class(class_label):
        ang = np.arctan2(obj.rect.cy - by, obj.rect.cx - bx)
        off = abs(float(angle_diff(ang, world_angle)))
        if best is None or off < best[0]:
            d = max(np.hypot(obj.rect.cx - bx, obj.rect.cy - by), 0.3)
            size = 0.5 * max(obj.rect.width, obj.rect.height)
            best = (off, float(np.arctan(size / d)))
    if best is None:
        return 0.05
    return float(np.clip(best[1], 0.01, 0.35))


def _segment_clear(grid: OccupancyGrid, p0, p1, dist: float) -> bool:
    """True when no occupied cell interrupts the segment (unknown space
    beyond the walls cannot occur between two in-building points)."""
    ox, oy, _ = grid.origin
    ang = np.arctan2(p1[1] - p0[1], p1[0] - p0[0])
    r = np.empty(1)
    v = np.zeros(1, dtype=np.uint8)
    _march.cast_scan(
        grid.cells, grid.resolution, p0[0] - ox, p0[1] - oy,
        np.array([ang]), float(dist), r, v,
    )
    return not (v[0] == 1 and r[0] < dist - 1e-9)
