"""Occupancy grids and the truncated obstacle distance field.

Grids use row-major uint8 arrays with three cell states. Row 0 of the
array is the cell row touching the map origin, i.e. arrays are stored
bottom-up while image files are top-down; the loaders flip accordingly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

_STATE_NAMES = {FREE: "free", OCCUPIED: "occupied", UNKNOWN: "unknown"}


@dataclass
class OccupancyGrid:
    """Planar occupancy grid with a metric anchor.

    cells: (height, width) uint8 array of FREE / OCCUPIED / UNKNOWN.
    resolution: cell edge length in meters.
    origin: (x, y, theta) world pose of the outer corner of cell (0, 0).
    """

    cells: np.ndarray
    resolution: float
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if self.cells.ndim != 2:
            raise ValueError("cells must be a 2-d array")
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if not np.isin(self.cells, (FREE, OCCUPIED, UNKNOWN)).all():
            raise ValueError("cells contain values outside the three known states")
        self.origin = (float(self.origin[0]), float(self.origin[1]), float(self.origin[2]))

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def world_to_cell(self, x, y):
        """Map world coordinates to (row, col) indices. Vectorized.

        Indices are not clipped; use in_bounds to filter.
        """
        ox, oy, oth = self.origin
        dx = np.asarray(x, dtype=float) - ox
        dy = np.asarray(y, dtype=float) - oy
        c, s = np.cos(oth), np.sin(oth)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        col = np.floor(lx / self.resolution).astype(np.int64)
        row = np.floor(ly / self.resolution).astype(np.int64)
        return row, col

    def cell_center(self, row, col):
        """World coordinates of cell centers. Vectorized, returns (x, y)."""
        ox, oy, oth = self.origin
        lx = (np.asarray(col, dtype=float) + 0.5) * self.resolution
        ly = (np.asarray(row, dtype=float) + 0.5) * self.resolution
        c, s = np.cos(oth), np.sin(oth)
        return ox + c * lx - s * ly, oy + s * lx + c * ly

    def in_bounds(self, row, col):
        row = np.asarray(row)
        col = np.asarray(col)
        return (row >= 0) & (row < self.height) & (col >= 0) & (col < self.width)

    def state_at(self, x, y, outside=UNKNOWN):
        """Cell state at world coordinates; `outside` for out-of-map queries."""
        row, col = self.world_to_cell(x, y)
        ok = self.in_bounds(row, col)
        out = np.full(np.shape(ok), outside, dtype=np.uint8)
        if out.ndim == 0:
            return self.cells[row, col] if ok else np.uint8(outside)
        out[ok] = self.cells[row[ok], col[ok]]
        return out

    def free_mask(self) -> np.ndarray:
        return self.cells == FREE

    def content_key(self) -> bytes:
        """Bytes that change whenever anything observable about the grid does."""
        head = json.dumps(
            {
                "shape": list(self.cells.shape),
                "resolution": self.resolution,
                "origin": list(self.origin),
            },
            sort_keys=True,
        ).encode()
        return head + self.cells.tobytes()


@dataclass
class DistanceField:
    """Distance to the nearest occupied cell, truncated at r_max.

    Values are meters, measured between cell centers, aligned with the
    grid the field was computed from.
    """

    values: np.ndarray
    resolution: float
    origin: tuple
    r_max: float

    grid_shape: tuple = field(init=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.grid_shape = self.values.shape

    def value_at(self, x, y):
        """Sample the field at world coordinates; outside the map -> r_max."""
        row, col = _world_to_cell(x, y, self.origin, self.resolution)
        ok = (
            (row >= 0)
            & (row < self.grid_shape[0])
            & (col >= 0)
            & (col < self.grid_shape[1])
        )
        out = np.full(np.shape(ok), self.r_max, dtype=np.float64)
        if out.ndim == 0:
            return float(self.values[row, col]) if ok else float(self.r_max)
        out[ok] = self.values[row[ok], col[ok]]
        return out


def _world_to_cell(x, y, origin, resolution):
    ox, oy, oth = origin
    dx = np.asarray(x, dtype=float) - ox
    dy = np.asarray(y, dtype=float) - oy
    c, s = np.cos(oth), np.sin(oth)
    col = np.floor((c * dx + s * dy) / resolution).astype(np.int64)
    row = np.floor((-s * dx + c * dy) / resolution).astype(np.int64)
    return row, col


def compute_distance_field(grid: OccupancyGrid, r_max: float = 15.0) -> DistanceField:
    """Exact euclidean distance from each cell center to the nearest
    occupied cell center, truncated at r_max.

    Occupied cells are the only distance sources. Unknown cells still get
    finite values like free cells do; whether a beam endpoint in unknown
    space is rewarded is an (undesirable but bounded) property of the map,
    not of this transform.
    """
    if r_max <= 0.0:
        raise ValueError("r_max must be positive")
    occupied = grid.cells == OCCUPIED
    if not occupied.any():
        values = np.full(grid.cells.shape, float(r_max))
        return DistanceField(values, grid.resolution, grid.origin, float(r_max))
    # Nearest-source indices rather than scipy's own distances: forming
    # sqrt(di^2 + dj^2) * resolution here keeps the result bit-identical
    # to the min-over-sources definition.
    rows, cols = ndimage.distance_transform_edt(
        ~occupied, return_distances=False, return_indices=True
    )
    ii, jj = np.indices(grid.cells.shape)
    di = (ii - rows).astype(np.float64)
    dj = (jj - cols).astype(np.float64)
    values = np.sqrt(di * di + dj * dj) * grid.resolution
    np.minimum(values, float(r_max), out=values)
    return DistanceField(values, grid.resolution, grid.origin, float(r_max))


def load_occupancy_grid(image_path, meta_path) -> OccupancyGrid:
    """Read a grid from a grayscale image plus a JSON metadata document.

    Metadata keys: resolution, origin ([x, y, theta]), occupied_threshold,
    free_threshold, optional negate and width/height for validation.
    Pixel values map to occupancy probability p = (255 - v) / 255 (or
    v / 255 when negate is set); p >= occupied_threshold is occupied,
    p <= free_threshold is free, anything between is unknown. The image
    is stored top-down and is flipped so row 0 sits at the origin.
    """
    try:
        with open(meta_path) as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"unreadable grid metadata {meta_path}: {e}") from e
    try:
        img = Image.open(image_path)
        img.load()
    except OSError as e:
        raise ValueError(f"unreadable grid image {image_path}: {e}") from e
    if img.mode not in ("L", "I", "I;16", "P"):
        raise ValueError(f"grid image must be single-channel, got mode {img.mode}")
    if img.mode != "L":
        img = img.convert("L")

    resolution = float(meta.get("resolution", 0.0))
    if resolution <= 0.0:
        raise ValueError("grid metadata declares a non-positive resolution")
    origin = tuple(float(v) for v in meta.get("origin", (0.0, 0.0, 0.0)))
    if len(origin) != 3:
        raise ValueError("origin must have three components [x, y, theta]")
    occ_th = float(meta.get("occupied_threshold", 0.65))
    free_th = float(meta.get("free_threshold", 0.25))
    if not (0.0 <= free_th < occ_th <= 1.0):
        raise ValueError("thresholds must satisfy 0 <= free < occupied <= 1")
    negate = bool(meta.get("negate", False))

    pixels = np.asarray(img, dtype=np.float64)
    for key, actual in (("width", pixels.shape[1]), ("height", pixels.shape[0])):
        if key in meta and int(meta[key]) != actual:
            raise ValueError(
                f"grid metadata {key}={meta[key]} does not match image {key}={actual}"
            )
    p = pixels / 255.0 if negate else (255.0 - pixels) / 255.0
    cells = np.full(p.shape, UNKNOWN, dtype=np.uint8)
    cells[p >= occ_th] = OCCUPIED
    cells[p <= free_th] = FREE
    return OccupancyGrid(cells[::-1].copy(), resolution, origin)


def save_occupancy_grid(grid: OccupancyGrid, image_path, meta_path) -> None:
    """Write the image + metadata pair that load_occupancy_grid reads."""
    # 128 -> p = 0.498, inside the (free_th, occ_th) band, so unknown
    # round-trips; 205 would land below the default free threshold.
    value = np.full(grid.cells.shape, 128, dtype=np.uint8)
    value[grid.cells == FREE] = 255
    value[grid.cells == OCCUPIED] = 0
    Image.fromarray(value[::-1], mode="L").save(image_path)
    meta = {
        "resolution": grid.resolution,
        "origin": list(grid.origin),
        "occupied_threshold": 0.65,
        "free_threshold": 0.25,
        "negate": False,
        "width": grid.width,
        "height": grid.height,
    }
    with open(meta_path, "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
