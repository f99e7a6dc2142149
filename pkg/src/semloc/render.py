"""Deterministic raster frames: occupancy grid, semantic rectangles,
particle cloud, truth and estimate markers. Pure numpy pixel writes so
identical inputs always produce identical images."""

from __future__ import annotations

import numpy as np

from .worldmap.grid import FREE, OCCUPIED, OccupancyGrid

COLOR_FREE = (245, 245, 245)
COLOR_UNKNOWN = (205, 205, 205)
COLOR_OCCUPIED = (40, 40, 40)
COLOR_PARTICLE = (40, 170, 40)
COLOR_TRUTH = (220, 30, 30)
COLOR_ESTIMATE = (30, 60, 220)

# cycled over the map vocabulary in order, so object colors are stable
# for a given semantic map
CLASS_PALETTE = (
    (230, 120, 0),
    (0, 140, 200),
    (150, 60, 180),
    (180, 160, 0),
    (0, 160, 120),
    (200, 60, 120),
    (110, 80, 40),
    (90, 110, 200),
)


class _Canvas:

    def __init__(self, grid: OccupancyGrid, scale: int):
        if scale < 1:
            raise ValueError("scale must be >= 1")
        h, w = grid.cells.shape
        base = np.empty((h, w, 3), dtype=np.uint8)
        base[:] = COLOR_UNKNOWN
        base[grid.cells == FREE] = COLOR_FREE
        base[grid.cells == OCCUPIED] = COLOR_OCCUPIED
        img = np.repeat(np.repeat(base, scale, axis=0), scale, axis=1)
        # row 0 of the grid sits at the map origin, so flip for display
        self.pixels = img[::-1].copy()
        self.scale = scale
        self.h = h * scale
        self.w = w * scale
        ox, oy, oth = grid.origin
        if abs(oth) > 1e-12:
            raise ValueError("rendering requires an axis-aligned grid")
        self.ox, self.oy = ox, oy
        self.res = grid.resolution

    def to_px(self, x, y):
        """World point to (row, col) image indices (row 0 at top)."""
        col = np.floor((np.asarray(x, dtype=float) - self.ox) / self.res * self.scale)
        row_up = np.floor((np.asarray(y, dtype=float) - self.oy) / self.res * self.scale)
        return (self.h - 1 - row_up.astype(np.int64)), col.astype(np.int64)

    def put(self, rows, cols, color, radius: int = 0):
        rows = np.atleast_1d(rows)
        cols = np.atleast_1d(cols)
        for dr in range(-radius, radius + 1):
            for dc in range(-radius, radius + 1):
                if dr * dr + dc * dc > radius * radius:
                    continue
                r = rows + dr
                c = cols + dc
                ok = (r >= 0) & (r < self.h) & (c >= 0) & (c < self.w)
                self.pixels[r[ok], c[ok]] = color

    def line(self, x0, y0, x1, y1, color):
        n = max(int(np.hypot(x1 - x0, y1 - y0) / self.res * self.scale) * 2, 2)
        t = np.linspace(0.0, 1.0, n)
        r, c = self.to_px(x0 + t * (x1 - x0), y0 + t * (y1 - y0))
        self.put(r, c, color)

    def rect_outline(self, rect, color):
        cs = rect.corners()
        for i in range(4):
            x0, y0 = cs[i]
            x1, y1 = cs[(i + 1) % 4]
            self.line(x0, y0, x1, y1, color)

    def cross(self, x, y, color, arm: int = 5):
        r, c = self.to_px(x, y)
        r, c = int(r), int(c)
        for d in range(-arm, arm + 1):
            self.put(r + d, c, color)
            self.put(r, c + d, color)


def render_frame(
    grid: OccupancyGrid,
    smap=None,
    particles=None,
    estimate=None,
    truth=None,
    scale: int = 2,
) -> np.ndarray:
    """(H, W, 3) uint8 frame. Particles draw as dots, ground truth as a
    cross, the estimate as a disk with a heading tick."""
    canvas = _Canvas(grid, scale)
    if smap is not None:
        colors = {
            label: CLASS_PALETTE[i % len(CLASS_PALETTE)]
            for i, label in enumerate(smap.class_vocabulary)
        }
        for obj in smap.objects:
            canvas.rect_outline(obj.rect, colors[obj.class_label])
    if particles is not None:
        poses = getattr(particles, "poses", particles)
        poses = np.asarray(poses, dtype=float)
        if poses.size:
            r, c = canvas.to_px(poses[:, 0], poses[:, 1])
            canvas.put(r, c, COLOR_PARTICLE)
    if truth is not None:
        canvas.cross(float(truth[0]), float(truth[1]), COLOR_TRUTH)
    if estimate is not None:
        pose = getattr(estimate, "pose", estimate)
        x, y, th = float(pose[0]), float(pose[1]), float(pose[2])
        r, c = canvas.to_px(x, y)
        canvas.put(int(r), int(c), COLOR_ESTIMATE, radius=3)
        tick = 8.0 * canvas.res
        canvas.line(x, y, x + tick * np.cos(th), y + tick * np.sin(th), COLOR_ESTIMATE)
    return canvas.pixels


def save_frame(pixels: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(pixels, mode="RGB").save(path)
