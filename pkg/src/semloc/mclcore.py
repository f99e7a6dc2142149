"""Monte Carlo localization core.

Particles live in flat numpy arrays: poses (N, 3) with theta kept in
[0, 2*pi), weights (N,). The LocalizationFilter orchestrates the
asynchronous event streams; the individual steps are free functions so
they can be tested and composed directly.

Modes:
  MCL    scan likelihood only; the detection stream is ignored entirely.
  SMCL   scan + semantic bearing likelihood.
  HMCL   scan + hierarchical initialization from room classification.
  HSMCL  everything.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import wrap_angle_2pi
from .sensormodels import (
    D_MISS,
    LIKELIHOOD_FLOOR,
    DetectionSet,
    LidarScan,
    mask_dynamic_beams,
    scan_log_likelihood,
    semantic_log_likelihood,
)
from .worldmap.grid import DistanceField, OccupancyGrid

MODES = ("MCL", "SMCL", "HMCL", "HSMCL")


@dataclass(frozen=True)
class OdometryDelta:
    """Body-frame motion increment between consecutive odometry epochs."""

    timestamp: float
    dx: float
    dy: float
    dtheta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dtheta])


@dataclass
class FilterConfig:
    particles: int = 10000
    sigma_odom: tuple = (0.15, 0.15, 0.15)
    sigma_obs: float = 6.0  # grid cells; scaled by map resolution at update time
    sigma_obs_norm: float = None  # normalizer scale in cells; defaults to sigma_obs
    r_max: float = 15.0
    tau_conf: float = 0.5
    tau_stability: float = 0.6
    d_xy: float = 0.1
    d_theta: float = 0.03
    beam_stride: int = 10
    ess_ratio: float = 0.5
    mode: str = "MCL"
    mask_dynamic: bool = True
    detection_staleness: float = 0.5
    class_window: int = 5
    d_miss: float = D_MISS
    likelihood_floor: float = LIKELIHOOD_FLOOR
    noise_floor: float = 0.01  # meters/radians; see motion_update
    init: str = "auto"  # auto | uniform | pose
    init_pose: tuple = None
    init_sigma: tuple = (0.05, 0.05, 0.05)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.particles < 1:
            raise ValueError("particles must be >= 1")
        for name in ("sigma_obs", "r_max", "d_xy", "d_theta", "tau_conf", "tau_stability"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.beam_stride < 1:
            raise ValueError("beam_stride must be >= 1")
        if len(tuple(self.sigma_odom)) != 3 or any(s < 0 for s in self.sigma_odom):
            raise ValueError("sigma_odom must be three non-negative values")
        if self.init not in ("auto", "uniform", "pose"):
            raise ValueError("init must be auto, uniform, or pose")


@dataclass
class ParticleSet:
    poses: np.ndarray  # (N, 3)
    weights: np.ndarray  # (N,)
    seed: int = 0  # rng lineage marker, carried for reproducibility audits
    degenerate: bool = False

    def __post_init__(self):
        self.poses = np.ascontiguousarray(self.poses, dtype=np.float64)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.poses.ndim != 2 or self.poses.shape[1] != 3:
            raise ValueError("poses must be (N, 3)")
        if self.weights.shape != (self.poses.shape[0],):
            raise ValueError("weights must be (N,)")
        if self.poses.shape[0] < 1:
            raise ValueError("at least one particle required")

    @property
    def n(self) -> int:
        return self.poses.shape[0]


@dataclass
class PoseEstimate:
    pose: tuple  # (x, y, theta), theta in [0, 2*pi)
    cov_xy: np.ndarray  # (2, 2) positional covariance
    theta_spread: float  # circular variance, 0 = concentrated
    timestamp: float = 0.0


def init_uniform(grid: OccupancyGrid, n: int, rng: np.random.Generator) -> ParticleSet:
    """Spread particles uniformly over free cells with uniform headings."""
    rows, cols = np.nonzero(grid.free_mask())
    if rows.shape[0] == 0:
        raise ValueError("grid has no free cells")
    pick = rng.integers(0, rows.shape[0], size=n)
    cx, cy = grid.cell_center(rows[pick], cols[pick])
    jitter = rng.uniform(-0.5, 0.5, size=(2, n)) * grid.resolution
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    poses = np.stack([cx + jitter[0], cy + jitter[1], theta], axis=1)
    return ParticleSet(poses, np.full(n, 1.0 / n))


def init_hierarchical(
    grid: OccupancyGrid, smap, category: str, n: int, rng: np.random.Generator
) -> ParticleSet:
    """Uniform initialization restricted to free cells inside rooms of
    the given category; falls back to the whole map with a warning when
    the category names no rooms."""
    rooms = smap.rooms_of_category(category)
    if not rooms:
        warnings.warn(
            f"no rooms of category {category!r}; falling back to uniform initialization",
            stacklevel=2,
        )
        return init_uniform(grid, n, rng)
    rows, cols = np.nonzero(grid.free_mask())
    cx, cy = grid.cell_center(rows, cols)
    inside = np.zeros(rows.shape[0], dtype=bool)
    for room in rooms:
        inside |= room.rect.contains(cx, cy)
    if not inside.any():
        warnings.warn(
            f"rooms of category {category!r} contain no free cells; "
            f"falling back to uniform initialization",
            stacklevel=2,
        )
        return init_uniform(grid, n, rng)
    rows, cols = rows[inside], cols[inside]
    pick = rng.integers(0, rows.shape[0], size=n)
    px, py = grid.cell_center(rows[pick], cols[pick])
    jitter = rng.uniform(-0.5, 0.5, size=(2, n)) * grid.resolution
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    poses = np.stack([px + jitter[0], py + jitter[1], theta], axis=1)
    return ParticleSet(poses, np.full(n, 1.0 / n))


def init_at_pose(
    pose, sigma, n: int, rng: np.random.Generator
) -> ParticleSet:
    """Gaussian cloud around a known pose, for tracking experiments."""
    pose = np.asarray(pose, dtype=float)
    noise = rng.standard_normal((n, 3)) * np.asarray(sigma, dtype=float)
    poses = pose[None, :] + noise
    poses[:, 2] = wrap_angle_2pi(poses[:, 2])
    return ParticleSet(poses, np.full(n, 1.0 / n))


def motion_update(
    pset: ParticleSet,
    delta: OdometryDelta,
    sigma_odom,
    rng: np.random.Generator,
    noise_floor: float = 0.01,
) -> ParticleSet:
    """Compose each particle with the body-frame delta plus Gaussian noise.

    Per-component noise sigma = sigma_odom[i] * max(|delta[i]|, noise_floor),
    so noise scales with motion but never fully vanishes. Weights are
    untouched.
    """
    d = delta.as_array()
    scale = np.asarray(sigma_odom, dtype=float) * np.maximum(np.abs(d), noise_floor)
    noise = rng.standard_normal((pset.n, 3)) * scale[None, :]
    body = d[None, :] + noise
    th = pset.poses[:, 2]
    c, s = np.cos(th), np.sin(th)
    out = np.empty_like(pset.poses)
    out[:, 0] = pset.poses[:, 0] + c * body[:, 0] - s * body[:, 1]
    out[:, 1] = pset.poses[:, 1] + s * body[:, 0] + c * body[:, 1]
    out[:, 2] = wrap_angle_2pi(th + body[:, 2])
    return ParticleSet(out, pset.weights.copy(), pset.seed, pset.degenerate)


def weight_update(pset: ParticleSet, per_particle_likelihood) -> ParticleSet:
    """Multiply weights by a likelihood function of the pose array and
    renormalize. If every likelihood sits at or below the floor the
    weights reset to uniform and the set is flagged degenerate.
    """
    lik = np.asarray(per_particle_likelihood(pset.poses), dtype=float)
    if lik.shape != (pset.n,):
        raise ValueError("likelihood function must return one value per particle")
    if np.all(lik <= LIKELIHOOD_FLOOR):
        return ParticleSet(
            pset.poses.copy(), np.full(pset.n, 1.0 / pset.n), pset.seed, degenerate=True
        )
    w = pset.weights * lik
    total = w.sum()
    if total <= 0.0 or not np.isfinite(total):
        return ParticleSet(
            pset.poses.copy(), np.full(pset.n, 1.0 / pset.n), pset.seed, degenerate=True
        )
    return ParticleSet(pset.poses.copy(), w / total, pset.seed, pset.degenerate)


def effective_sample_size(pset: ParticleSet) -> float:
    return float(1.0 / np.sum(np.square(pset.weights)))


def low_variance_resample(pset: ParticleSet, rng: np.random.Generator) -> ParticleSet:
    """Systematic resampling with a single uniform draw in [0, 1/N)."""
    n = pset.n
    positions = (rng.random() + np.arange(n)) / n
    cum = np.cumsum(pset.weights)
    cum[-1] = 1.0  # guard against rounding starving the last particle
    idx = np.searchsorted(cum, positions, side="right")
    idx = np.minimum(idx, n - 1)
    return ParticleSet(
        pset.poses[idx].copy(), np.full(n, 1.0 / n), pset.seed, pset.degenerate
    )


def estimate_pose(pset: ParticleSet) -> PoseEstimate:
    """Weighted mean position with a circular-mean heading.

    theta_spread is the circular variance 1 - |sum w * e^{i theta}|,
    zero when all particles agree.
    """
    w = pset.weights
    x = float(w @ pset.poses[:, 0])
    y = float(w @ pset.poses[:, 1])
    sin_sum = float(w @ np.sin(pset.poses[:, 2]))
    cos_sum = float(w @ np.cos(pset.poses[:, 2]))
    theta = float(wrap_angle_2pi(np.arctan2(sin_sum, cos_sum)))
    dx = pset.poses[:, 0] - x
    dy = pset.poses[:, 1] - y
    cov = np.array(
        [
            [float(w @ (dx * dx)), float(w @ (dx * dy))],
            [float(w @ (dx * dy)), float(w @ (dy * dy))],
        ]
    )
    spread = float(1.0 - np.hypot(sin_sum, cos_sum))
    return PoseEstimate(pose=(x, y, theta), cov_xy=cov, theta_spread=spread)


class LocalizationFilter:
    """Asynchronous particle filter over odometry, scan, and detection
    streams.

    Scan updates fire only after the robot moved more than d_xy or turned
    more than d_theta since the last one. Semantic updates fire on every
    detection set (in the modes that use them). Both check the ESS < N/2
    resampling rule afterwards. Out-of-order events within a stream are
    dropped with a warning.
    """

    def __init__(
        self,
        config: FilterConfig,
        grid: OccupancyGrid,
        dist_field: DistanceField,
        smap=None,
        vis_index=None,
        classifier=None,
        seed: int = 0,
    ):
        self.config = config
        self.grid = grid
        self.dist_field = dist_field
        self.smap = smap
        self.vis_index = vis_index
        self.classifier = classifier
        self.seed = seed
        self.rng = np.random.default_rng(seed)

        mode = config.mode
        if mode in ("SMCL", "HSMCL") and vis_index is None:
            raise ValueError(f"mode {mode} requires a visibility index")
        if mode in ("HMCL", "HSMCL") and config.init == "auto":
            if classifier is None or smap is None:
                raise ValueError(f"mode {mode} requires a classifier and semantic map")
        self._uses_detections = mode != "MCL"
        self._semantic_weighting = mode in ("SMCL", "HSMCL")
        self._hierarchical = mode in ("HMCL", "HSMCL") and config.init == "auto"

        self.particles = None
        self.initial_category = None
        self._pending_window = []
        self._last_detections = None
        self._acc_xy = 0.0
        self._acc_theta = 0.0
        self._last_t = {"odom": -np.inf, "scan": -np.inf, "detections": -np.inf}

    # -- initialization ------------------------------------------------

    def _init_now(self, category=None):
        cfg = self.config
        if cfg.init == "pose":
            if cfg.init_pose is None:
                raise ValueError("init='pose' requires init_pose")
            self.particles = init_at_pose(
                cfg.init_pose, cfg.init_sigma, cfg.particles, self.rng
            )
        elif category is not None:
            self.particles = init_hierarchical(
                self.grid, self.smap, category, cfg.particles, self.rng
            )
            self.initial_category = category
        else:
            self.particles = init_uniform(self.grid, cfg.particles, self.rng)
        self.particles.seed = self.seed

    def _ensure_initialized(self):
        if self.particles is None and not self._hierarchical:
            self._init_now()

    @property
    def initialized(self) -> bool:
        return self.particles is not None

    # -- event plumbing ------------------------------------------------

    def _stale(self, stream: str, t: float) -> bool:
        if t < self._last_t[stream]:
            warnings.warn(
                f"out-of-order {stream} event at t={t:.3f} "
                f"(last {self._last_t[stream]:.3f}); dropped",
                stacklevel=3,
            )
            return True
        self._last_t[stream] = t
        return False

    def on_odometry(self, delta: OdometryDelta):
        if self._stale("odom", delta.timestamp):
            return None
        self._ensure_initialized()
        if self.particles is None:
            return None
        self.particles = motion_update(
            self.particles, delta, self.config.sigma_odom, self.rng,
            self.config.noise_floor,
        )
        self._acc_xy += float(np.hypot(delta.dx, delta.dy))
        self._acc_theta += abs(delta.dtheta)
        return None

    def on_scan(self, scan: LidarScan):
        if self._stale("scan", scan.timestamp):
            return None
        self._ensure_initialized()
        if self.particles is None:
            return None
        cfg = self.config
        if self._acc_xy <= cfg.d_xy and self._acc_theta <= cfg.d_theta:
            return None
        used = scan
        if self._uses_detections and cfg.mask_dynamic and self.smap is not None:
            dets = self._last_detections
            if (
                dets is not None
                and scan.timestamp - dets.timestamp <= cfg.detection_staleness
                and self.smap.dynamic_classes
            ):
                used = mask_dynamic_beams(scan, dets, self.smap.dynamic_classes)
        # config sigmas are in cells; the distance field stores meters
        sigma = cfg.sigma_obs * self.grid.resolution
        sigma_norm = None
        if cfg.sigma_obs_norm is not None:
            sigma_norm = cfg.sigma_obs_norm * self.grid.resolution
        self.particles = weight_update(
            self.particles,
            lambda poses: np.exp(
                scan_log_likelihood(
                    used,
                    poses,
                    self.dist_field,
                    sigma,
                    cfg.beam_stride,
                    sigma_norm,
                    cfg.likelihood_floor,
                )
            ),
        )
        self._acc_xy = 0.0
        self._acc_theta = 0.0
        self._maybe_resample()
        return self._emit(scan.timestamp)

    def on_detections(self, dets: DetectionSet):
        if not self._uses_detections:
            return None
        if self._stale("detections", dets.timestamp):
            return None
        self._last_detections = dets
        if self.particles is None:
            if self._hierarchical:
                self._pending_window.append(dets)
                if len(self._pending_window) >= self.config.class_window:
                    self._classify_and_init()
            else:
                self._ensure_initialized()
            if self.particles is None:
                return None
        if not self._semantic_weighting:
            return None
        cfg = self.config
        self.particles = weight_update(
            self.particles,
            lambda poses: np.exp(
                semantic_log_likelihood(
                    dets,
                    poses,
                    self.vis_index,
                    cfg.tau_conf,
                    cfg.d_miss,
                    cfg.likelihood_floor,
                    vocabulary=self.smap.class_vocabulary if self.smap else None,
                )
            ),
        )
        self._maybe_resample()
        return self._emit(dets.timestamp)

    def _classify_and_init(self):
        from .semantics import build_feature_vector, classify_room

        fv = build_feature_vector(
            self._pending_window,
            self.smap.class_vocabulary,
            self.config.tau_conf,
        )
        category = classify_room(self.classifier, fv)
        self._pending_window = []
        self._init_now(category=category)

    def _maybe_resample(self):
        ess = effective_sample_size(self.particles)
        if ess < self.config.ess_ratio * self.particles.n:
            self.particles = low_variance_resample(self.particles, self.rng)

    def _emit(self, timestamp: float) -> PoseEstimate:
        est = estimate_pose(self.particles)
        est.timestamp = timestamp
        return est

    def estimate(self) -> PoseEstimate:
        if self.particles is None:
            raise ValueError("filter not initialized yet")
        return estimate_pose(self.particles)


__all__ = [
    "MODES",
    "OdometryDelta",
    "FilterConfig",
    "ParticleSet",
    "PoseEstimate",
    "init_uniform",
    "init_hierarchical",
    "init_at_pose",
    "motion_update",
    "weight_update",
    "effective_sample_size",
    "low_variance_resample",
    "estimate_pose",
    "LocalizationFilter",
]
