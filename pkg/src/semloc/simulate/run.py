"""End-to-end run synthesis: drive a waypoint path through a world and
emit a merged, timestamped stream of ground truth, odometry deltas,
scans, and detection frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import angle_diff, wrap_angle_2pi
from ..logio import SensorLog, hash_grid, hash_semantic
from ..mclcore import OdometryDelta
from ..sensormodels import default_cameras
from ..worldmap.grid import FREE, OccupancyGrid
from .sensors import AgentSpec, SensorNoiseSpec, simulate_detections, simulate_scan


@dataclass
class TrajectorySpec:
    """Waypoint path for a holonomic robot.

    The robot tracks the polyline at constant speed while its heading
    turns toward the direction of travel, capped at `angular_cap` rad/s,
    then holds still for `settle` seconds at the goal.
    """

    waypoints: list
    speed: float = 0.4
    angular_cap: float = 1.5
    settle: float = 1.0
    agents: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("trajectory needs at least two waypoints")
        if self.speed <= 0.0:
            raise ValueError("speed must be positive")

    def to_document(self) -> dict:
        return {
            "waypoints": [list(map(float, p)) for p in self.waypoints],
            "speed": self.speed,
            "angular_cap": self.angular_cap,
            "settle": self.settle,
            "agents": [a.to_document() for a in self.agents],
        }

    @staticmethod
    def from_document(doc: dict) -> "TrajectorySpec":
        return TrajectorySpec(
            waypoints=[tuple(float(v) for v in p) for p in doc["waypoints"]],
            speed=float(doc.get("speed", 0.4)),
            angular_cap=float(doc.get("angular_cap", 1.5)),
            settle=float(doc.get("settle", 1.0)),
            agents=[AgentSpec.from_document(a) for a in doc.get("agents", [])],
        )


@dataclass
class SensorRates:
    odom_hz: int = 50
    lidar_hz: int = 10
    detection_hz: int = 5
    gt_hz: int = 10
    beam_count: int = 360
    fov: float = 1.5 * np.pi
    range_max: float = 15.0

    def __post_init__(self):
        for sub in ("lidar_hz", "detection_hz", "gt_hz"):
            if self.odom_hz % getattr(self, sub) != 0:
                raise ValueError(f"odom_hz must be a multiple of {sub}")

    def to_document(self) -> dict:
        return {
            "odom_hz": self.odom_hz,
            "lidar_hz": self.lidar_hz,
            "detection_hz": self.detection_hz,
            "gt_hz": self.gt_hz,
            "beam_count": self.beam_count,
            "fov": self.fov,
            "range_max": self.range_max,
        }

    @staticmethod
    def from_document(doc: dict) -> "SensorRates":
        base = SensorRates()
        kwargs = {}
        for key in base.to_document():
            if key in doc:
                cast = float if key in ("fov", "range_max") else int
                kwargs[key] = cast(doc[key])
        return SensorRates(**kwargs)


class _PathFollower:

    def __init__(self, waypoints):
        self.pts = np.asarray(waypoints, dtype=float)
        segs = np.diff(self.pts, axis=0)
        self.seg_len = np.hypot(segs[:, 0], segs[:, 1])
        if np.any(self.seg_len <= 0.0):
            raise ValueError("trajectory has a zero-length segment")
        self.seg_dir = np.arctan2(segs[:, 1], segs[:, 0])
        self.cum = np.concatenate([[0.0], np.cumsum(self.seg_len)])
        self.total = float(self.cum[-1])

    def state_at(self, s: float):
        """(position, desired heading) at arclength s, clamped to the path."""
        s = min(max(s, 0.0), self.total)
        i = int(np.searchsorted(self.cum[1:], s, side="right"))
        i = min(i, len(self.seg_len) - 1)
        frac = (s - self.cum[i]) / self.seg_len[i]
        pos = self.pts[i] + frac * (self.pts[i + 1] - self.pts[i])
        return pos, float(self.seg_dir[i])


def simulate_run(
    grid: OccupancyGrid,
    smap,
    index,
    trajectory: TrajectorySpec,
    noise: SensorNoiseSpec = None,
    cameras=None,
    seed: int = 0,
    rates: SensorRates = None,
    world_name: str = "custom",
) -> SensorLog:
    """Simulate one run and return its sensor log.

    Records at the same timestamp are ordered ground truth, odometry,
    scan, detections. Odometry deltas are the true body-frame motion
    plus diffusion noise scaled by distance traveled and rotation, so a
    zero-noise log dead-reckons exactly onto the ground truth.
    """
    noise = noise if noise is not None else SensorNoiseSpec()
    rates = rates if rates is not None else SensorRates()
    cameras = list(cameras) if cameras is not None else default_cameras()
    rng = np.random.default_rng(seed)

    for wx, wy in trajectory.waypoints:
        r, c = grid.world_to_cell(float(wx), float(wy))
        if not grid.in_bounds(r, c) or grid.cells[int(r), int(c)] != FREE:
            raise ValueError(f"waypoint ({wx}, {wy}) is not in free space")

    path = _PathFollower(trajectory.waypoints)
    dt = 1.0 / rates.odom_hz
    scan_every = rates.odom_hz // rates.lidar_hz
    det_every = rates.odom_hz // rates.detection_hz
    gt_every = rates.odom_hz // rates.gt_hz
    n_steps = int(np.ceil((path.total / trajectory.speed + trajectory.settle) / dt))

    records = []
    pos, heading = path.state_at(0.0)
    pose = np.array([pos[0], pos[1], wrap_angle_2pi(heading)])
    agents = list(trajectory.agents)

    for k in range(n_steps + 1):
        t = k * dt
        if k > 0:
            prev = pose.copy()
            pos, desired = path.state_at(trajectory.speed * t)
            turn = float(angle_diff(desired, prev[2]))
            max_turn = trajectory.angular_cap * dt
            heading = prev[2] + float(np.clip(turn, -max_turn, max_turn))
            pose = np.array([pos[0], pos[1], wrap_angle_2pi(heading)])

            dw = pose[:2] - prev[:2]
            c, s = np.cos(prev[2]), np.sin(prev[2])
            dx = c * dw[0] + s * dw[1]
            dy = -s * dw[0] + c * dw[1]
            dth = float(angle_diff(pose[2], prev[2]))
            ds = float(np.hypot(dx, dy))
            sig_xy = noise.odom_drift_per_m * np.sqrt(ds)
            sig_th = np.sqrt(
                (noise.odom_drift_per_m**2) * ds
                + (noise.odom_drift_per_rad**2) * abs(dth)
            )
            if sig_xy > 0.0:
                dx += float(rng.normal(0.0, sig_xy))
                dy += float(rng.normal(0.0, sig_xy))
            if sig_th > 0.0:
                dth += float(rng.normal(0.0, sig_th))
            odom = OdometryDelta(timestamp=t, dx=dx, dy=dy, dtheta=dth)
        else:
            odom = None

        if k % gt_every == 0 or k == n_steps:
            records.append((t, "gt", pose.copy()))
        if odom is not None:
            records.append((t, "odom", odom))
        agent_pos = [a.position_at(t) for a in agents] if agents else None
        if k % scan_every == 0:
            scan = simulate_scan(
                grid, pose, rates.beam_count, rates.fov, rates.range_max,
                noise, rng, agents=agents, agent_positions=agent_pos,
            )
            scan.timestamp = t
            records.append((t, "scan", scan))
        if k % det_every == 0:
            dets = simulate_detections(
                index, smap, pose, cameras, noise, rng,
                agents=agents, agent_positions=agent_pos, grid=grid, timestamp=t,
            )
            records.append((t, "detections", dets))

    header = {
        "type": "sensor_log",
        "version": 1,
        "seed": int(seed),
        "world": world_name,
        "grid_hash": hash_grid(grid),
        "semantic_hash": hash_semantic(smap),
        "cameras": [cam.to_document() for cam in cameras],
        "rates": rates.to_document(),
        "noise": noise.to_document(),
    }
    return SensorLog(header=header, records=records)
