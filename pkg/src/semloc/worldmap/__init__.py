from .grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    DistanceField,
    OccupancyGrid,
    compute_distance_field,
    load_occupancy_grid,
    save_occupancy_grid,
)
from .semantic import (
    MapSchemaError,
    Room,
    SemanticObject,
    SemanticWorldMap,
    load_semantic_map,
    save_semantic_map,
)
from .visibility import (
    VisibilityIndex,
    build_visibility_index,
    load_or_build_visibility_index,
    load_visibility_index,
    query_visibility,
    save_visibility_index,
)

__all__ = [
    "FREE",
    "OCCUPIED",
    "UNKNOWN",
    "OccupancyGrid",
    "DistanceField",
    "compute_distance_field",
    "load_occupancy_grid",
    "save_occupancy_grid",
    "MapSchemaError",
    "SemanticObject",
    "Room",
    "SemanticWorldMap",
    "load_semantic_map",
    "save_semantic_map",
    "VisibilityIndex",
    "build_visibility_index",
    "query_visibility",
    "save_visibility_index",
    "load_visibility_index",
    "load_or_build_visibility_index",
]
