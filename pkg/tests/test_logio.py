import json

import numpy as np
import pytest

from semloc.logio import (
    LogFormatError,
    SensorLog,
    read_estimates,
    read_sensor_log,
    write_estimates,
    write_sensor_log,
)
from semloc.mclcore import OdometryDelta, PoseEstimate
from semloc.sensormodels import (
    CameraModel,
    DetectionSet,
    LidarScan,
    default_cameras,
    detection_from_bbox,
)


def sample_log():
    cams = default_cameras()
    scan = LidarScan(
        timestamp=0.1,
        angles=-0.5 + np.arange(5) * 0.25,
        ranges=np.array([1.0, 2.0, 5.0, 0.5, 3.3]),
        range_max=5.0,
        valid=np.array([1, 1, 0, 1, 1], dtype=bool),
    )
    det = detection_from_bbox(cams[0], "desk", 0.9, 100.0, 200.0)
    records = [
        (0.0, "gt", np.array([1.0, 2.0, 0.5])),
        (0.1, "odom", OdometryDelta(0.1, 0.01, 0.0, 0.002)),
        (0.1, "scan", scan),
        (0.2, "detections", DetectionSet(0.2, [det])),
        (0.3, "detections", DetectionSet(0.3, [])),
    ]
    header = {
        "type": "sensor_log",
        "version": 1,
        "seed": 5,
        "world": "tiny",
        "grid_hash": "abc",
        "semantic_hash": "def",
        "cameras": [c.to_document() for c in cams],
    }
    return SensorLog(header=header, records=records)


def test_sensor_log_round_trip(tmp_path):
    path = tmp_path / "run.jsonl"
    log = sample_log()
    write_sensor_log(log, path)
    back = read_sensor_log(path)
    assert back.header == log.header
    assert len(back) == len(log)
    kinds = [k for _, k, _ in back]
    assert kinds == ["gt", "odom", "scan", "detections", "detections"]
    assert np.allclose(back.records[0][2], [1.0, 2.0, 0.5])
    d = back.records[1][2]
    assert (d.dx, d.dy, d.dtheta) == (0.01, 0.0, 0.002)
    scan = back.records[2][2]
    orig = log.records[2][2]
    assert np.allclose(scan.angles, orig.angles)
    assert np.array_equal(scan.ranges, orig.ranges)
    assert np.array_equal(scan.valid, orig.valid)
    det = back.records[3][2].detections[0]
    src = log.records[3][2].detections[0]
    assert det.class_label == src.class_label
    assert det.camera_id == src.camera_id
    assert det.bearing_angle == pytest.approx(src.bearing_angle)


def test_sensor_log_canonical_bytes(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_sensor_log(sample_log(), a)
    write_sensor_log(sample_log(), b)
    assert a.read_bytes() == b.read_bytes()
    # canonical form: sorted keys, no whitespace
    first = a.read_text().splitlines()[0]
    assert ": " not in first and ", " not in first
    keys = list(json.loads(first))
    assert keys == sorted(keys)


def test_sensor_log_gt_helpers():
    log = sample_log()
    gt = log.gt_array()
    assert gt.shape == (1, 4)
    assert gt[0, 0] == 0.0
    assert log.duration() == pytest.approx(0.3)
    assert len(log.cameras()) == 4
    assert SensorLog(header={}).gt_array().shape == (0, 4)
    assert SensorLog(header={}).duration() == 0.0


def test_read_rejects_corrupt_line_with_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    write_sensor_log(sample_log(), path)
    lines = path.read_text().splitlines()
    lines[3] = '{"type":"scan","t":0.1,"ranges":[1.0]}'  # missing fields
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LogFormatError, match="line 4"):
        read_sensor_log(path)
    lines[3] = "{not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LogFormatError, match="line 4"):
        read_sensor_log(path)


def test_read_rejects_version_and_header_problems(tmp_path):
    path = tmp_path / "bad.jsonl"
    log = sample_log()
    log.header = dict(log.header, version=99)
    write_sensor_log(log, path)
    with pytest.raises(LogFormatError, match="version"):
        read_sensor_log(path)
    path.write_text('{"type":"other"}\n')
    with pytest.raises(LogFormatError, match="header"):
        read_sensor_log(path)
    path.write_text("")
    with pytest.raises(LogFormatError, match="empty"):
        read_sensor_log(path)


def test_read_rejects_backwards_timestamps(tmp_path):
    path = tmp_path / "bad.jsonl"
    log = sample_log()
    log.records = [
        (1.0, "gt", np.array([0.0, 0.0, 0.0])),
        (0.5, "gt", np.array([0.0, 0.0, 0.0])),
    ]
    write_sensor_log(log, path)
    with pytest.raises(LogFormatError, match="backwards"):
        read_sensor_log(path)


def test_read_rejects_unknown_camera(tmp_path):
    path = tmp_path / "bad.jsonl"
    log = sample_log()
    log.header = dict(log.header, cameras=[])
    write_sensor_log(log, path)
    with pytest.raises(LogFormatError, match="camera"):
        read_sensor_log(path)


def test_nonuniform_scan_rejected_at_write(tmp_path):
    scan = LidarScan(0.0, np.array([0.0, 0.1, 0.3]), np.ones(3), 5.0)
    log = SensorLog(header={}, records=[(0.0, "scan", scan)])
    with pytest.raises(LogFormatError, match="uniform"):
        write_sensor_log(log, tmp_path / "x.jsonl")


def test_estimates_round_trip(tmp_path):
    path = tmp_path / "est.jsonl"
    ests = [
        PoseEstimate((1.0, 2.0, 0.3), np.array([[0.01, 0.0], [0.0, 0.02]]), 0.05, 0.5),
        PoseEstimate((1.1, 2.1, 0.4), np.eye(2) * 0.01, 0.04, 1.0),
    ]
    write_estimates(path, ests, meta={"mode": "MCL"})
    header, back = read_estimates(path)
    assert header["mode"] == "MCL"
    assert len(back) == 2
    assert back[0].pose == ests[0].pose
    assert np.array_equal(back[0].cov_xy, ests[0].cov_xy)
    assert back[1].timestamp == 1.0
    # canonical output is reproducible
    path2 = tmp_path / "est2.jsonl"
    write_estimates(path2, ests, meta={"mode": "MCL"})
    assert path.read_bytes() == path2.read_bytes()


def test_estimates_corrupt_line(tmp_path):
    path = tmp_path / "est.jsonl"
    write_estimates(path, [PoseEstimate((0, 0, 0), np.eye(2), 0.0, 0.0)])
    lines = path.read_text().splitlines()
    lines.append('{"t":1.0}')
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LogFormatError, match="line 3"):
        read_estimates(path)
    path.write_text("[]\n")
    with pytest.raises(LogFormatError, match="header"):
        read_estimates(path)
