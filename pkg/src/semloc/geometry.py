"""Small planar geometry helpers shared across the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(theta):
    """Wrap angle(s) to (-pi, pi]. Works on scalars and arrays."""
    wrapped = np.mod(-np.asarray(theta) + np.pi, TWO_PI)
    return -(wrapped - np.pi)


def wrap_angle_2pi(theta):
    """Wrap angle(s) to [0, 2*pi)."""
    return np.mod(np.asarray(theta), TWO_PI)


def angle_diff(a, b):
    """Shortest signed difference a - b, in (-pi, pi]."""
    return wrap_angle(np.asarray(a) - np.asarray(b))


def rot2d(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def unit_vector(theta):
    """Unit vector(s) for heading(s); returns shape (..., 2)."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def compose_pose(pose, delta):
    """Apply a body-frame increment (dx, dy, dtheta) to pose (x, y, theta).

    The translational part of the increment is expressed in the frame of
    the starting pose, matching how wheel odometry is reported.
    """
    x, y, th = pose
    dx, dy, dth = delta
    c, s = np.cos(th), np.sin(th)
    return (x + c * dx - s * dy, y + s * dx + c * dy, wrap_angle(th + dth))


def relative_pose(frm, to):
    """Body-frame increment that takes pose `frm` to pose `to`."""
    x0, y0, th0 = frm
    x1, y1, th1 = to
    c, s = np.cos(th0), np.sin(th0)
    gx, gy = x1 - x0, y1 - y0
    return (c * gx + s * gy, -s * gx + c * gy, float(angle_diff(th1, th0)))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by center and full extents, in meters."""

    cx: float
    cy: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError(
                f"rectangle extents must be positive, got {self.width} x {self.height}"
            )

    @property
    def xmin(self) -> float:
        return self.cx - 0.5 * self.width

    @property
    def xmax(self) -> float:
        return self.cx + 0.5 * self.width

    @property
    def ymin(self) -> float:
        return self.cy - 0.5 * self.height

    @property
    def ymax(self) -> float:
        return self.cy + 0.5 * self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x, y) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        return (
            (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)
        )

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.xmax <= other.xmin
            or other.xmax <= self.xmin
            or self.ymax <= other.ymin
            or other.ymax <= self.ymin
        )

    def expanded(self, margin: float) -> "Rect":
        return Rect(self.cx, self.cy, self.width + 2.0 * margin, self.height + 2.0 * margin)

    def corners(self) -> np.ndarray:
        """Corner coordinates in counter-clockwise order, shape (4, 2)."""
        return np.array(
            [
                [self.xmin, self.ymin],
                [self.xmax, self.ymin],
                [self.xmax, self.ymax],
                [self.xmin, self.ymax],
            ]
        )

    def perimeter_points(self, spacing: float) -> np.ndarray:
        """Sample the boundary at roughly `spacing` intervals, shape (n, 2).

        Each edge is walked from its starting corner with the corner
        included and the far corner left to the next edge, so corners are
        never duplicated and the walk is deterministic.
        """
        if spacing <= 0.0:
            raise ValueError("spacing must be positive")
        pts = []
        corners = self.corners()
        for i in range(4):
            a = corners[i]
            b = corners[(i + 1) % 4]
            edge = b - a
            length = float(np.hypot(edge[0], edge[1]))
            steps = max(1, int(np.ceil(length / spacing)))
            for k in range(steps):
                pts.append(a + edge * (k / steps))
        return np.array(pts)

    def to_document(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "width": self.width, "height": self.height}

    @staticmethod
    def from_document(doc: dict) -> "Rect":
        return Rect(
            float(doc["cx"]), float(doc["cy"]), float(doc["width"]), float(doc["height"])
        )

    @staticmethod
    def from_bounds(xmin: float, ymin: float, xmax: float, ymax: float) -> "Rect":
        return Rect(0.5 * (xmin + xmax), 0.5 * (ymin + ymax), xmax - xmin, ymax - ymin)
