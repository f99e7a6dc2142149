"""Per-cell semantic visibility index.

For every free cell and every indexable object class, the index stores
the set of bearings (world-frame angles from the cell center) at which
some perimeter point of an object of that class is visible. Bearings are
deduplicated onto a fixed angular lattice: the circle is split into
floor(2 * pi / angular_resolution) bins and each hit bin is represented
by its center, which keeps representatives at least angular_resolution
apart and within half a bin of some truly visible point.

Storage is one CSR structure per class over flattened cell ids, which
the particle weighting kernels consume directly.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..geometry import TWO_PI
from . import _march
from .grid import FREE, OccupancyGrid
from .semantic import SemanticWorldMap

INDEX_VERSION = 1

_BLOCK_CELLS = 2048


def bin_count(angular_resolution: float) -> int:
    if angular_resolution <= 0.0 or angular_resolution > TWO_PI:
        raise ValueError("angular_resolution must be in (0, 2*pi]")
    return int(np.floor(TWO_PI / angular_resolution + 1e-9))


def rect_cell_box(rect, ox: float, oy: float, res: float, width: int, height: int):
    """Inclusive cell index box of all cells whose square overlaps the
    rect with positive area, clipped to the grid. Edges exactly on a
    cell line do not claim the far cell.
    """
    bx0 = int(np.floor((rect.xmin - ox) / res))
    by0 = int(np.floor((rect.ymin - oy) / res))
    bx1 = int(np.ceil((rect.xmax - ox) / res)) - 1
    by1 = int(np.ceil((rect.ymax - oy) / res)) - 1
    bx1 = max(bx1, bx0)
    by1 = max(by1, by0)
    return (
        max(bx0, 0),
        max(by0, 0),
        min(bx1, width - 1),
        min(by1, height - 1),
    )


@dataclass
class VisibilityIndex:
    classes: tuple
    angular_resolution: float
    nbins: int
    grid_shape: tuple
    resolution: float
    origin: tuple
    starts: list  # per class: (n_cells + 1,) int64 CSR offsets
    angles: list  # per class: (entries,) float32 bin-center bearings, sorted per cell
    content_hash: str = ""

    _class_ids: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.classes = tuple(self.classes)
        self._class_ids = {c: i for i, c in enumerate(self.classes)}

    @property
    def n_cells(self) -> int:
        return self.grid_shape[0] * self.grid_shape[1]

    def class_id(self, class_label: str) -> int:
        return self._class_ids.get(class_label, -1)

    def entry_count(self) -> int:
        return int(sum(a.shape[0] for a in self.angles))

    def cell_ids(self, x, y):
        """Flattened cell ids for world points, -1 where off the map."""
        ox, oy, oth = self.origin
        c, s = np.cos(oth), np.sin(oth)
        dx = np.asarray(x, dtype=float) - ox
        dy = np.asarray(y, dtype=float) - oy
        col = np.floor((c * dx + s * dy) / self.resolution).astype(np.int64)
        row = np.floor((-s * dx + c * dy) / self.resolution).astype(np.int64)
        ok = (row >= 0) & (row < self.grid_shape[0]) & (col >= 0) & (col < self.grid_shape[1])
        return np.where(ok, row * self.grid_shape[1] + col, -1)

    def bearing_angles_at(self, x: float, y: float, class_label: str) -> np.ndarray:
        """Stored world-frame bearing angles of `class_label` from the
        cell containing (x, y); empty for unindexed cells or classes."""
        c = self.class_id(class_label)
        if c < 0:
            return np.empty(0, dtype=np.float64)
        cid = int(self.cell_ids(x, y))
        if cid < 0:
            return np.empty(0, dtype=np.float64)
        s = self.starts[c]
        return self.angles[c][s[cid] : s[cid + 1]].astype(np.float64)

    def nearest_distances(self, class_label: str, cell_ids, query_angles, d_miss: float):
        """Vectorized cosine bearing distance to the nearest stored
        bearing, d_miss where a cell stores nothing for the class."""
        out = np.empty(len(query_angles), dtype=np.float64)
        c = self.class_id(class_label)
        if c < 0:
            out.fill(d_miss)
            return out
        _march.nearest_angle_distance(
            self.starts[c],
            self.angles[c],
            np.ascontiguousarray(cell_ids, dtype=np.int64),
            np.ascontiguousarray(query_angles, dtype=np.float64),
            d_miss,
            out,
        )
        return out


def query_visibility(index: VisibilityIndex, x: float, y: float, class_label: str) -> np.ndarray:
    """Unit bearing vectors (n, 2) of the class visible from the cell
    containing the world point (x, y)."""
    ang = index.bearing_angles_at(x, y, class_label)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1).reshape(-1, 2)


def _content_hash(grid, smap, angular_resolution, excluded) -> str:
    h = hashlib.sha256()
    h.update(b"visibility-index-v%d\n" % INDEX_VERSION)
    h.update(grid.content_key())
    h.update(smap.content_key())
    h.update(repr(float(angular_resolution)).encode())
    h.update(json.dumps(sorted(excluded)).encode())
    return h.hexdigest()


def build_visibility_index(
    grid: OccupancyGrid,
    smap: SemanticWorldMap,
    angular_resolution: float = np.pi / 180.0,
    excluded_classes=None,
    progress=None,
) -> VisibilityIndex:
    """Ray-march every (free cell, object perimeter sample) pair and
    collect the visible bearing bins per class.

    Classes in excluded_classes (the map's dynamic classes by default)
    are not indexed. Objects lying entirely off the grid are skipped with
    a warning. Rays leaving the map count as blocked.
    """
    if abs(grid.origin[2]) > 1e-12:
        raise ValueError("visibility index requires an axis-aligned grid (origin theta = 0)")
    excluded = tuple(smap.dynamic_classes if excluded_classes is None else excluded_classes)
    classes = tuple(c for c in smap.class_vocabulary if c not in excluded)
    nbins = bin_count(angular_resolution)
    res = grid.resolution
    H, W = grid.cells.shape
    ox, oy, _ = grid.origin

    class_of = {c: i for i, c in enumerate(classes)}
    sample_x, sample_y, sample_obj = [], [], []
    obj_class, obj_box = [], []
    for obj in smap.objects:
        ci = class_of.get(obj.class_label)
        if ci is None:
            continue
        r = obj.rect
        if (
            r.xmax <= ox
            or r.ymax <= oy
            or r.xmin >= ox + W * res
            or r.ymin >= oy + H * res
        ):
            warnings.warn(
                f"object of class {obj.class_label!r} at ({r.cx:.2f}, {r.cy:.2f}) "
                f"lies outside the grid and is not indexed",
                stacklevel=2,
            )
            continue
        pts = r.perimeter_points(res)
        oid = len(obj_class)
        sample_x.append(pts[:, 0] - ox)
        sample_y.append(pts[:, 1] - oy)
        sample_obj.append(np.full(len(pts), oid, dtype=np.int32))
        obj_class.append(ci)
        obj_box.append(rect_cell_box(r, ox, oy, res, W, H))

    free = (grid.cells == FREE).astype(np.uint8)
    n_cells = H * W
    counts = [np.zeros(n_cells, dtype=np.int64) for _ in classes]
    per_class_cells = [[] for _ in classes]
    per_class_angles = [[] for _ in classes]

    if obj_class:
        sx = np.ascontiguousarray(np.concatenate(sample_x))
        sy = np.ascontiguousarray(np.concatenate(sample_y))
        so = np.ascontiguousarray(np.concatenate(sample_obj))
        ocls = np.asarray(obj_class, dtype=np.int32)
        obox = np.asarray(obj_box, dtype=np.int32).reshape(-1, 4)
        jump = _march.build_jump_table(free)
        rows, cols = np.nonzero(free)
        rows = rows.astype(np.int64)
        cols = cols.astype(np.int64)
        bin_width = TWO_PI / nbins
        hits = np.zeros((_BLOCK_CELLS, len(classes), nbins), dtype=np.uint8)
        for lo in range(0, rows.shape[0], _BLOCK_CELLS):
            hi = min(lo + _BLOCK_CELLS, rows.shape[0])
            block = hits[: hi - lo]
            block[:] = 0
            _march.build_visibility_block(
                jump,
                res,
                rows[lo:hi],
                cols[lo:hi],
                sx,
                sy,
                so,
                ocls,
                obox,
                nbins,
                block,
            )
            ci_b, cls_b, bin_b = np.nonzero(block)
            cell_b = rows[lo + ci_b] * W + cols[lo + ci_b]
            ang_b = ((bin_b + 0.5) * bin_width).astype(np.float32)
            for c in range(len(classes)):
                m = cls_b == c
                if m.any():
                    per_class_cells[c].append(cell_b[m])
                    per_class_angles[c].append(ang_b[m])
                    np.add.at(counts[c], cell_b[m], 1)
            if progress is not None:
                progress(hi / rows.shape[0])

    starts, angles = [], []
    for c in range(len(classes)):
        off = np.zeros(n_cells + 1, dtype=np.int64)
        np.cumsum(counts[c], out=off[1:])
        if per_class_cells[c]:
            cells = np.concatenate(per_class_cells[c])
            angs = np.concatenate(per_class_angles[c])
            order = np.lexsort((angs, cells))
            angs = np.ascontiguousarray(angs[order])
        else:
            angs = np.empty(0, dtype=np.float32)
        starts.append(off)
        angles.append(angs)

    return VisibilityIndex(
        classes=classes,
        angular_resolution=float(angular_resolution),
        nbins=nbins,
        grid_shape=(H, W),
        resolution=res,
        origin=grid.origin,
        starts=starts,
        angles=angles,
        content_hash=_content_hash(grid, smap, angular_resolution, excluded),
    )


def save_visibility_index(index: VisibilityIndex, path) -> None:
    meta = {
        "version": INDEX_VERSION,
        "classes": list(index.classes),
        "angular_resolution": index.angular_resolution,
        "nbins": index.nbins,
        "grid_shape": list(index.grid_shape),
        "resolution": index.resolution,
        "origin": list(index.origin),
        "content_hash": index.content_hash,
    }
    arrays = {"meta": np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    for i in range(len(index.classes)):
        arrays[f"starts_{i}"] = index.starts[i]
        arrays[f"angles_{i}"] = index.angles[i]
    with open(path, "wb") as f:
        np.savez_compressed(f, **arrays)


def load_visibility_index(path) -> VisibilityIndex:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("version") != INDEX_VERSION:
            raise ValueError(f"unsupported visibility index version {meta.get('version')}")
        n = len(meta["classes"])
        starts = [np.ascontiguousarray(data[f"starts_{i}"], dtype=np.int64) for i in range(n)]
        angles = [np.ascontiguousarray(data[f"angles_{i}"], dtype=np.float32) for i in range(n)]
    return VisibilityIndex(
        classes=tuple(meta["classes"]),
        angular_resolution=float(meta["angular_resolution"]),
        nbins=int(meta["nbins"]),
        grid_shape=tuple(meta["grid_shape"]),
        resolution=float(meta["resolution"]),
        origin=tuple(meta["origin"]),
        starts=starts,
        angles=angles,
        content_hash=str(meta["content_hash"]),
    )


def load_or_build_visibility_index(
    grid: OccupancyGrid,
    smap: SemanticWorldMap,
    angular_resolution: float = np.pi / 180.0,
    cache_path=None,
    excluded_classes=None,
    progress=None,
) -> VisibilityIndex:
    """Return a cached index if its content hash matches the inputs,
    otherwise build and (if cache_path is given) store one."""
    excluded = tuple(smap.dynamic_classes if excluded_classes is None else excluded_classes)
    want = _content_hash(grid, smap, angular_resolution, excluded)
    if cache_path is not None:
        try:
            cached = load_visibility_index(cache_path)
            if cached.content_hash == want:
                return cached
        except (OSError, ValueError, KeyError):
            pass
    index = build_visibility_index(
        grid, smap, angular_resolution, excluded_classes=excluded, progress=progress
    )
    if cache_path is not None:
        save_visibility_index(index, cache_path)
    return index
