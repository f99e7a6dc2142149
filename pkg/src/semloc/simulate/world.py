"""Synthetic floor-plan construction.

A WorldSpec lists rooms (free interiors), doors (openings carved through
walls) and labeled objects. generate_world rasterizes it into an
occupancy grid plus the matching semantic map: the canvas starts
unknown, each room stamps an occupied wall band around its interior,
interiors are carved free, and doors are carved free. Objects are never
stamped into the grid; the floor plan stays sparse and furniture lives
only in the semantic layer, so LiDAR geometry comes from walls alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Rect
from ..worldmap.grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid
from ..worldmap.semantic import (
    DEFAULT_DYNAMIC,
    DEFAULT_VOCABULARY,
    Room,
    SemanticObject,
    SemanticWorldMap,
)


@dataclass(frozen=True)
class RoomSpec:
    name: str
    category: str
    rect: Rect


@dataclass(frozen=True)
class DoorSpec:
    """Opening carved through a wall band; rect must span the band."""

    rect: Rect


@dataclass(frozen=True)
class ObjectSpec:
    class_label: str
    rect: Rect


@dataclass
class WorldSpec:
    name: str
    width: float
    height: float
    resolution: float = 0.05
    wall_thickness: float = 0.1
    rooms: list = field(default_factory=list)
    doors: list = field(default_factory=list)
    objects: list = field(default_factory=list)
    class_vocabulary: tuple = DEFAULT_VOCABULARY
    dynamic_classes: tuple = DEFAULT_DYNAMIC
    origin: tuple = (0.0, 0.0, 0.0)

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "resolution": self.resolution,
            "wall_thickness": self.wall_thickness,
            "rooms": [
                {"name": r.name, "category": r.category, "rect": r.rect.to_document()}
                for r in self.rooms
            ],
            "doors": [d.rect.to_document() for d in self.doors],
            "objects": [
                {"class": o.class_label, "rect": o.rect.to_document()}
                for o in self.objects
            ],
            "class_vocabulary": list(self.class_vocabulary),
            "dynamic_classes": list(self.dynamic_classes),
            "origin": list(self.origin),
        }

    @staticmethod
    def from_document(doc: dict) -> "WorldSpec":
        return WorldSpec(
            name=str(doc.get("name", "custom")),
            width=float(doc["width"]),
            height=float(doc["height"]),
            resolution=float(doc.get("resolution", 0.05)),
            wall_thickness=float(doc.get("wall_thickness", 0.1)),
            rooms=[
                RoomSpec(str(r["name"]), str(r["category"]), Rect.from_document(r["rect"]))
                for r in doc.get("rooms", [])
            ],
            doors=[DoorSpec(Rect.from_document(d)) for d in doc.get("doors", [])],
            objects=[
                ObjectSpec(str(o["class"]), Rect.from_document(o["rect"]))
                for o in doc.get("objects", [])
            ],
            class_vocabulary=tuple(doc.get("class_vocabulary", DEFAULT_VOCABULARY)),
            dynamic_classes=tuple(doc.get("dynamic_classes", DEFAULT_DYNAMIC)),
            origin=tuple(float(v) for v in doc.get("origin", (0.0, 0.0, 0.0))),
        )


def _cell_span(lo: float, hi: float, res: float, n: int):
    a = int(np.floor(lo / res + 1e-9))
    b = int(np.ceil(hi / res - 1e-9))
    return max(a, 0), min(b, n)


def _stamp(cells, rect: Rect, res: float, value: int, origin_xy=(0.0, 0.0)) -> None:
    h, w = cells.shape
    x0, x1 = _cell_span(rect.xmin - origin_xy[0], rect.xmax - origin_xy[0], res, w)
    y0, y1 = _cell_span(rect.ymin - origin_xy[1], rect.ymax - origin_xy[1], res, h)
    if x1 > x0 and y1 > y0:
        cells[y0:y1, x0:x1] = value


def generate_world(spec: WorldSpec):
    """Rasterize a WorldSpec. Returns (OccupancyGrid, SemanticWorldMap)."""
    res = spec.resolution
    W = int(round(spec.width / res))
    H = int(round(spec.height / res))
    if W <= 0 or H <= 0:
        raise ValueError("world extents must be positive")
    for i, a in enumerate(spec.rooms):
        for b in spec.rooms[i + 1 :]:
            if a.rect.overlaps(b.rect):
                raise ValueError(f"room interiors overlap: {a.name!r} and {b.name!r}")

    ox, oy, oth = spec.origin
    if abs(oth) > 1e-12:
        raise ValueError("generated worlds use an axis-aligned origin")
    cells = np.full((H, W), UNKNOWN, dtype=np.uint8)
    tw = spec.wall_thickness
    for room in spec.rooms:
        _stamp(cells, room.rect.expanded(tw), res, OCCUPIED, (ox, oy))
    for room in spec.rooms:
        _stamp(cells, room.rect, res, FREE, (ox, oy))
    for door in spec.doors:
        before = int(np.count_nonzero(cells == OCCUPIED))
        _stamp(cells, door.rect, res, FREE, (ox, oy))
        if int(np.count_nonzero(cells == OCCUPIED)) == before:
            raise ValueError(
                f"door at ({door.rect.cx:.2f}, {door.rect.cy:.2f}) does not open any wall"
            )

    grid = OccupancyGrid(cells, res, spec.origin)
    smap = SemanticWorldMap(
        objects=[SemanticObject(o.class_label, o.rect) for o in spec.objects],
        rooms=[Room(r.name, r.category, r.rect) for r in spec.rooms],
        class_vocabulary=spec.class_vocabulary,
        dynamic_classes=spec.dynamic_classes,
    )
    return grid, smap
