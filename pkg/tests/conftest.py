"""Shared fixtures.

Heavy artifacts (the default world's visibility index) are session
scoped and disk cached under .cache/ keyed by content hash, so repeat
runs skip the build without ever reusing a stale index.
"""

import numpy as np
import pytest

from semloc.simulate import generate_world, preset_world
from semloc.worldmap import compute_distance_field, load_or_build_visibility_index

CACHE_DIR = ".cache"


@pytest.fixture(scope="session")
def default_world():
    spec = preset_world("default")
    grid, smap = generate_world(spec)
    return spec, grid, smap


@pytest.fixture(scope="session")
def default_index(default_world):
    _, grid, smap = default_world
    return load_or_build_visibility_index(
        grid, smap, cache_path=f"{CACHE_DIR}/default_index.npz"
    )


@pytest.fixture(scope="session")
def default_dist(default_world):
    _, grid, _ = default_world
    return compute_distance_field(grid, r_max=15.0)


@pytest.fixture(scope="session")
def twin_world():
    spec = preset_world("twin")
    grid, smap = generate_world(spec)
    index = load_or_build_visibility_index(
        grid, smap, cache_path=f"{CACHE_DIR}/twin_index.npz"
    )
    return spec, grid, smap, index


@pytest.fixture(scope="session")
def hallway_world():
    spec = preset_world("hallway")
    grid, smap = generate_world(spec)
    index = load_or_build_visibility_index(
        grid, smap, cache_path=f"{CACHE_DIR}/hallway_index.npz"
    )
    return spec, grid, smap, index


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
