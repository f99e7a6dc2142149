"""Canned worlds and trajectories used by demos, tests, and experiments.

All coordinates are authored on the 0.05 m cell lattice so wall bands
rasterize crisply. Rooms are separated by 0.2 m gaps that the adjacent
wall bands fill completely.
"""

from __future__ import annotations

from ..geometry import Rect
from .run import TrajectorySpec
from .sensors import AgentSpec
from .world import DoorSpec, ObjectSpec, RoomSpec, WorldSpec


def _furnish(category: str, r: Rect) -> list:
    """Deterministic furniture layout for a room of the given category.

    Wall-mounted items (whiteboard) straddle the room edge so part of
    their perimeter sits inside the wall band; everything else stands on
    free floor. Nothing is rasterized into the grid either way.
    """
    x0, x1, y0, y1 = r.xmin, r.xmax, r.ymin, r.ymax
    out = []
    if category == "office":
        out += [
            ObjectSpec("desk", Rect(x0 + 1.4, y1 - 0.4, 1.2, 0.6)),
            ObjectSpec("chair", Rect(x0 + 1.4, y1 - 1.05, 0.5, 0.5)),
            ObjectSpec("whiteboard", Rect(x0 + 3.6, y1, 1.0, 0.12)),
            ObjectSpec("drawers", Rect(x1 - 0.4, y0 + 1.0, 0.5, 0.8)),
        ]
    elif category == "kitchen":
        out += [
            ObjectSpec("sink", Rect(x0 + 1.0, y1 - 0.3, 0.7, 0.45)),
            ObjectSpec("oven", Rect(x0 + 2.2, y1 - 0.3, 0.6, 0.5)),
            ObjectSpec("table", Rect(r.cx, r.cy, 0.9, 0.7)),
            ObjectSpec("chair", Rect(r.cx - 1.0, r.cy, 0.5, 0.5)),
        ]
    elif category == "reception":
        out += [
            ObjectSpec("sofa", Rect(x0 + 0.45, r.cy, 0.7, 1.2)),
            ObjectSpec("plant", Rect(x1 - 0.45, y1 - 0.45, 0.5, 0.5)),
            ObjectSpec("table", Rect(r.cx + 0.6, r.cy, 0.8, 0.6)),
        ]
    elif category == "storage":
        out += [
            ObjectSpec("storage", Rect(x0 + 0.3, r.cy, 0.5, 1.2)),
            ObjectSpec("storage", Rect(x1 - 0.3, r.cy, 0.5, 1.2)),
            ObjectSpec("cardboard", Rect(r.cx - 0.5, y0 + 0.6, 0.6, 0.6)),
            ObjectSpec("drawers", Rect(r.cx, y1 - 0.35, 0.6, 0.6)),
            ObjectSpec("extinguisher", Rect(x0 + 0.3, y0 + 0.3, 0.2, 0.2)),
        ]
    return out


def default_world() -> WorldSpec:
    """30 x 15 m floor: 8 rooms across 4 categories plus 2 corridors."""
    rooms = [
        RoomSpec("office_nw", "office", Rect.from_bounds(0.6, 8.5, 7.2, 14.4)),
        RoomSpec("kitchen_n", "kitchen", Rect.from_bounds(7.4, 8.5, 14.0, 14.4)),
        RoomSpec("reception_n", "reception", Rect.from_bounds(14.2, 8.5, 21.0, 14.4)),
        RoomSpec("storage_ne", "storage", Rect.from_bounds(21.2, 8.5, 29.4, 14.4)),
        RoomSpec("reception_s", "reception", Rect.from_bounds(0.6, 0.6, 7.2, 6.5)),
        RoomSpec("storage_s", "storage", Rect.from_bounds(7.4, 0.6, 14.0, 6.5)),
        RoomSpec("kitchen_s", "kitchen", Rect.from_bounds(16.0, 0.6, 22.6, 6.5)),
        RoomSpec("office_se", "office", Rect.from_bounds(22.8, 0.6, 29.4, 6.5)),
        RoomSpec("corridor_main", "corridor", Rect.from_bounds(0.6, 6.7, 29.4, 8.3)),
        RoomSpec("corridor_spur", "corridor", Rect.from_bounds(14.2, 0.6, 15.8, 6.5)),
    ]
    doors = [
        DoorSpec(Rect(1.7, 8.4, 1.0, 0.24)),  # office_nw
        DoorSpec(Rect(13.1, 8.4, 1.0, 0.24)),  # kitchen_n
        DoorSpec(Rect(15.4, 8.4, 1.0, 0.24)),  # reception_n
        DoorSpec(Rect(28.1, 8.4, 1.0, 0.24)),  # storage_ne
        DoorSpec(Rect(6.2, 6.6, 1.0, 0.24)),  # reception_s
        DoorSpec(Rect(8.5, 6.6, 1.0, 0.24)),  # storage_s
        DoorSpec(Rect(21.3, 6.6, 1.0, 0.24)),  # kitchen_s
        DoorSpec(Rect(23.8, 6.6, 1.0, 0.24)),  # office_se
        DoorSpec(Rect(15.0, 6.6, 1.0, 0.24)),  # corridor_spur north end
        DoorSpec(Rect(15.9, 2.6, 0.24, 1.0)),  # corridor_spur into kitchen_s
    ]
    objects = []
    for room in rooms:
        objects += _furnish(room.category, room.rect)
    objects += [
        ObjectSpec("extinguisher", Rect(10.0, 8.15, 0.2, 0.2)),
        ObjectSpec("extinguisher", Rect(20.0, 6.85, 0.2, 0.2)),
    ]
    return WorldSpec(
        name="default",
        width=30.0,
        height=15.0,
        rooms=rooms,
        doors=doors,
        objects=objects,
    )


def twin_world(distinguish: bool = True) -> WorldSpec:
    """Two translation-identical office rooms off one corridor.

    The west room carries one extra wall-mounted whiteboard when
    `distinguish` is set; everything else is the west room shifted east
    by exactly 6 m, so scan geometry alone cannot tell the rooms apart.
    """
    shift = 6.0
    west = Rect.from_bounds(0.6, 2.4, 5.4, 6.4)
    east = Rect.from_bounds(0.6 + shift, 2.4, 5.4 + shift, 6.4)
    rooms = [
        RoomSpec("room_west", "office", west),
        RoomSpec("room_east", "office", east),
        RoomSpec("corridor", "corridor", Rect.from_bounds(0.6, 0.6, 11.4, 2.2)),
    ]
    doors = [
        DoorSpec(Rect(2.7, 2.3, 1.0, 0.24)),
        DoorSpec(Rect(2.7 + shift, 2.3, 1.0, 0.24)),
    ]

    def room_objects(r: Rect) -> list:
        return [
            ObjectSpec("desk", Rect(r.xmin + 1.4, r.ymax - 0.45, 1.6, 0.7)),
            ObjectSpec("chair", Rect(r.xmin + 1.4, r.ymax - 1.15, 0.5, 0.5)),
            ObjectSpec("drawers", Rect(r.xmax - 0.45, r.ymin + 1.0, 0.6, 0.9)),
        ]

    objects = room_objects(west) + room_objects(east)
    if distinguish:
        objects.append(ObjectSpec("whiteboard", Rect(west.xmin, west.cy + 1.0, 0.16, 1.4)))
    objects += [ObjectSpec("door", d.rect) for d in doors]
    return WorldSpec(
        name="twin" if distinguish else "twin_plain",
        width=12.0,
        height=7.0,
        rooms=rooms,
        doors=doors,
        objects=objects,
    )


def hallway_world() -> WorldSpec:
    """Corridor with two side rooms; the masking scenario's stage."""
    rooms = [
        RoomSpec("hall", "corridor", Rect.from_bounds(0.6, 2.4, 11.4, 4.0)),
        RoomSpec("room_n", "office", Rect.from_bounds(3.0, 4.2, 8.0, 5.4)),
        RoomSpec("room_s", "reception", Rect.from_bounds(3.0, 0.6, 8.0, 2.2)),
    ]
    doors = [
        DoorSpec(Rect(5.5, 4.1, 1.0, 0.24)),
        DoorSpec(Rect(7.0, 2.3, 1.0, 0.24)),
    ]
    objects = [
        ObjectSpec("desk", Rect(4.0, 5.0, 1.2, 0.6)),
        ObjectSpec("sofa", Rect(4.0, 1.0, 1.4, 0.7)),
        ObjectSpec("plant", Rect(10.9, 3.6, 0.4, 0.4)),
        ObjectSpec("extinguisher", Rect(1.5, 3.85, 0.2, 0.2)),
    ]
    objects += [ObjectSpec("door", d.rect) for d in doors]
    return WorldSpec(
        name="hallway",
        width=12.0,
        height=6.0,
        rooms=rooms,
        doors=doors,
        objects=objects,
    )


def stability_worlds():
    """(map_spec, live_spec) pair for stability analysis experiments.

    Both describe one sealed room with a desk on the north wall; the
    live world has the cardboard box moved from the west wall to the
    east wall, so observed box bearings contradict the map.
    """
    room = RoomSpec("lab", "office", Rect.from_bounds(0.6, 0.6, 5.6, 5.6))
    desk = ObjectSpec("desk", Rect(2.8, 5.2, 1.6, 0.7))
    box_map = ObjectSpec("cardboard", Rect(1.0, 2.6, 0.6, 0.6))
    box_live = ObjectSpec("cardboard", Rect(5.2, 2.0, 0.6, 0.6))

    def build(box):
        return WorldSpec(
            name="stability",
            width=6.2,
            height=6.2,
            rooms=[room],
            doors=[],
            objects=[desk, box],
        )

    return build(box_map), build(box_live)


def preset_world(name: str) -> WorldSpec:
    worlds = {
        "default": default_world,
        "twin": twin_world,
        "twin_plain": lambda: twin_world(distinguish=False),
        "hallway": hallway_world,
        "stability_map": lambda: stability_worlds()[0],
        "stability_live": lambda: stability_worlds()[1],
    }
    if name not in worlds:
        raise ValueError(f"unknown world preset {name!r}; choose from {sorted(worlds)}")
    return worlds[name]()


def preset_trajectory(name: str) -> TrajectorySpec:
    """Named robot routes (plus scripted agents where the scenario has
    them) for the preset worlds."""
    t = {
        "default/tour0": TrajectorySpec(
            waypoints=[
                (3.9, 11.5),
                (1.7, 10.5),
                (1.7, 7.5),
                (9.0, 7.5),
                (13.1, 7.6),
                (13.1, 9.5),
                (12.0, 11.5),
                (9.0, 12.5),
            ],
            speed=0.45,
        ),
        "default/tour1": TrajectorySpec(
            waypoints=[
                (19.3, 3.5),
                (21.3, 5.0),
                (21.3, 7.5),
                (15.4, 7.5),
                (15.4, 9.0),
                (15.6, 11.0),
                (19.5, 12.5),
                (16.5, 10.0),
            ],
            speed=0.45,
        ),
        "default/tour2": TrajectorySpec(
            waypoints=[
                (25.3, 11.5),
                (28.1, 10.5),
                (28.1, 7.5),
                (23.8, 7.4),
                (23.8, 4.5),
                (26.0, 2.0),
                (28.5, 4.0),
            ],
            speed=0.45,
        ),
        "default/tour3": TrajectorySpec(
            waypoints=[
                (3.9, 3.5),
                (6.2, 4.5),
                (6.2, 7.4),
                (8.5, 7.5),
                (8.6, 4.5),
                (10.7, 2.0),
                (12.5, 4.0),
                (10.7, 5.5),
            ],
            speed=0.45,
        ),
        "default/tour4": TrajectorySpec(
            waypoints=[
                (5.0, 7.5),
                (12.0, 7.4),
                (15.0, 7.6),
                (15.0, 4.0),
                (15.0, 1.4),
                (15.9, 2.6),
                (19.3, 2.6),
                (21.3, 4.5),
            ],
            speed=0.45,
        ),
        "twin/loop": TrajectorySpec(
            waypoints=[
                (1.6, 3.4),
                (4.2, 3.4),
                (4.4, 5.4),
                (1.6, 5.5),
                (1.5, 3.6),
                (4.2, 3.5),
                (4.3, 5.3),
                (1.7, 5.4),
            ],
            speed=0.4,
        ),
        "hallway/patrol": TrajectorySpec(
            waypoints=[(1.4, 3.2), (10.2, 3.2), (1.6, 3.3)],
            speed=0.35,
            agents=[
                # crosses the hall through both doors, cutting the
                # robot's patrol line twice per lap
                AgentSpec(
                    waypoints=[(5.5, 4.8), (5.5, 3.2), (7.0, 3.2), (7.0, 1.4)],
                    speed=0.5,
                    radius=0.25,
                    loop=True,
                )
            ],
        ),
        "stability/loop": TrajectorySpec(
            waypoints=[
                (2.0, 2.0),
                (4.0, 2.1),
                (4.1, 4.0),
                (2.1, 4.1),
                (2.0, 2.1),
                (4.0, 2.2),
                (4.1, 4.1),
                (2.1, 4.2),
            ],
            speed=0.4,
        ),
    }
    if name not in t:
        raise ValueError(f"unknown trajectory preset {name!r}; choose from {sorted(t)}")
    return t[name]
