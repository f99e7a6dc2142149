"""Feed a recorded sensor log through the localization filter."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .logio import SensorLog, hash_grid, hash_semantic
from .mclcore import FilterConfig, LocalizationFilter


@dataclass
class ReplayResult:
    estimates: list = field(default_factory=list)
    filter: LocalizationFilter = None


def replay_log(
    log: SensorLog,
    config: FilterConfig,
    grid,
    dist_field,
    smap=None,
    vis_index=None,
    classifier=None,
    seed: int = 0,
    check_hashes: bool = True,
    frame_callback=None,
) -> ReplayResult:
    """Replay a log and collect one estimate per observation update.

    The log header's map hashes must match the supplied maps unless
    check_hashes is disabled. With init "pose" and no explicit pose the
    filter starts at the log's first ground-truth record. frame_callback,
    when given, runs as frame_callback(filter, estimate) after every
    emitted estimate.
    """
    if check_hashes:
        want = log.header.get("grid_hash")
        if want is not None and want != hash_grid(grid):
            raise ValueError("occupancy grid does not match the log header hash")
        want = log.header.get("semantic_hash")
        if smap is not None and want is not None and want != hash_semantic(smap):
            raise ValueError("semantic map does not match the log header hash")
    if config.init == "pose" and config.init_pose is None:
        gt = log.gt_array()
        if gt.shape[0] == 0:
            raise ValueError("init 'pose' needs either init_pose or ground truth")
        config = replace(config, init_pose=tuple(gt[0, 1:4]))
    filt = LocalizationFilter(
        config,
        grid,
        dist_field,
        smap=smap,
        vis_index=vis_index,
        classifier=classifier,
        seed=seed,
    )
    estimates = []
    for t, kind, payload in log:
        est = None
        if kind == "odom":
            filt.on_odometry(payload)
        elif kind == "scan":
            est = filt.on_scan(payload)
        elif kind == "detections":
            est = filt.on_detections(payload)
        if est is not None:
            estimates.append(est)
            if frame_callback is not None:
                frame_callback(filt, est)
    return ReplayResult(estimates=estimates, filter=filt)
