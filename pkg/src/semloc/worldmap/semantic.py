"""Semantic annotation layer: labeled object footprints and room regions.

The layer is independent of the occupancy grid; consistency between the
two is the map author's job. Everything serializes to a single JSON
document so maps can be versioned and diffed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..geometry import Rect

SCHEMA_VERSION = 1

DEFAULT_VOCABULARY = (
    "sink",
    "door",
    "oven",
    "whiteboard",
    "table",
    "cardboard",
    "plant",
    "drawers",
    "sofa",
    "storage",
    "chair",
    "extinguisher",
    "person",
    "desk",
)

DEFAULT_DYNAMIC = ("person",)


class MapSchemaError(ValueError):
    """Raised when a semantic map document violates the schema."""


@dataclass(frozen=True)
class SemanticObject:
    class_label: str
    rect: Rect


@dataclass(frozen=True)
class Room:
    name: str
    category: str
    rect: Rect


@dataclass
class SemanticWorldMap:
    objects: list = field(default_factory=list)
    rooms: list = field(default_factory=list)
    class_vocabulary: tuple = DEFAULT_VOCABULARY
    dynamic_classes: tuple = DEFAULT_DYNAMIC
    room_categories: tuple = ()

    def __post_init__(self):
        self.class_vocabulary = tuple(self.class_vocabulary)
        self.dynamic_classes = tuple(self.dynamic_classes)
        if not self.room_categories:
            seen = []
            for r in self.rooms:
                if r.category not in seen:
                    seen.append(r.category)
            self.room_categories = tuple(seen)
        else:
            self.room_categories = tuple(self.room_categories)
        self._validate()

    def _validate(self):
        vocab = set(self.class_vocabulary)
        if len(vocab) != len(self.class_vocabulary):
            raise MapSchemaError("class_vocabulary contains duplicates")
        for d in self.dynamic_classes:
            if d not in vocab:
                raise MapSchemaError(f"dynamic class {d!r} is not in the vocabulary")
        for obj in self.objects:
            if obj.class_label not in vocab:
                raise MapSchemaError(f"object class {obj.class_label!r} is not in the vocabulary")
            if obj.rect.width <= 0.0 or obj.rect.height <= 0.0:
                raise MapSchemaError(f"object of class {obj.class_label!r} has a zero-area rect")
        names = [r.name for r in self.rooms]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise MapSchemaError(f"duplicate room names: {dup}")
        cats = set(self.room_categories)
        for r in self.rooms:
            if r.rect.width <= 0.0 or r.rect.height <= 0.0:
                raise MapSchemaError(f"room {r.name!r} has a zero-area rect")
            if r.category not in cats:
                raise MapSchemaError(
                    f"room {r.name!r} has category {r.category!r} "
                    f"not in declared room_categories"
                )

    def static_classes(self) -> tuple:
        return tuple(c for c in self.class_vocabulary if c not in self.dynamic_classes)

    def objects_of_class(self, class_label: str) -> list:
        return [o for o in self.objects if o.class_label == class_label]

    def rooms_of_category(self, category: str) -> list:
        return [r for r in self.rooms if r.category == category]

    def class_index(self, class_label: str) -> int:
        return self.class_vocabulary.index(class_label)

    def to_document(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "class_vocabulary": list(self.class_vocabulary),
            "dynamic_classes": list(self.dynamic_classes),
            "room_categories": list(self.room_categories),
            "objects": [
                {"class": o.class_label, "rect": o.rect.to_document()} for o in self.objects
            ],
            "rooms": [
                {"name": r.name, "category": r.category, "rect": r.rect.to_document()}
                for r in self.rooms
            ],
        }

    def content_key(self) -> bytes:
        return json.dumps(self.to_document(), sort_keys=True, separators=(",", ":")).encode()

    @staticmethod
    def from_document(doc: dict) -> "SemanticWorldMap":
        if not isinstance(doc, dict):
            raise MapSchemaError("semantic map document must be a JSON object")
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise MapSchemaError(f"unsupported schema_version {version}")
        try:
            objects = [
                SemanticObject(str(o["class"]), Rect.from_document(o["rect"]))
                for o in doc.get("objects", [])
            ]
            rooms = [
                Room(str(r["name"]), str(r["category"]), Rect.from_document(r["rect"]))
                for r in doc.get("rooms", [])
            ]
        except (KeyError, TypeError) as e:
            raise MapSchemaError(f"malformed object or room entry: {e}") from e
        return SemanticWorldMap(
            objects=objects,
            rooms=rooms,
            class_vocabulary=tuple(doc.get("class_vocabulary", DEFAULT_VOCABULARY)),
            dynamic_classes=tuple(doc.get("dynamic_classes", DEFAULT_DYNAMIC)),
            room_categories=tuple(doc.get("room_categories", ())),
        )


def load_semantic_map(path) -> SemanticWorldMap:
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MapSchemaError(f"unreadable semantic map {path}: {e}") from e
    return SemanticWorldMap.from_document(doc)


def save_semantic_map(smap: SemanticWorldMap, path) -> None:
    with open(path, "w") as f:
        json.dump(smap.to_document(), f, indent=2, sort_keys=True)
        f.write("\n")
