"""Independent reference implementations used to check the package.

Everything here recomputes results from first principles along a
different code path than the library (no shared kernels, no shared
transforms), so agreement is evidence rather than tautology. Keep these
slow and obvious.
"""

import numpy as np
from numba import njit

FREE, OCCUPIED, UNKNOWN = 0, 1, 2


def brute_distance_field(cells, resolution, r_max):
    """Min distance from every cell center to every occupied cell center,
    truncated at r_max. O(cells * sources), meant for small grids."""
    H, W = cells.shape
    occ = np.argwhere(cells == OCCUPIED)
    if occ.shape[0] == 0:
        return np.full((H, W), float(r_max))
    ii, jj = np.indices((H, W))
    pts = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(np.float64)
    src = occ.astype(np.float64)
    out = np.full(pts.shape[0], np.inf)
    for k in range(src.shape[0]):
        d = np.sqrt((pts[:, 0] - src[k, 0]) ** 2 + (pts[:, 1] - src[k, 1]) ** 2)
        np.minimum(out, d * resolution, out=out)
    return np.minimum(out, float(r_max)).reshape(H, W)


@njit(cache=True)
def dense_segment_visible(cells, res, cx, cy, sx, sy, bx0, by0, bx1, by1):
    """March every res/4 sample (and the exact endpoint) of the segment
    against the raw grid; no skipping of any kind."""
    dx = sx - cx
    dy = sy - cy
    L = np.sqrt(dx * dx + dy * dy)
    if L == 0.0:
        return True
    ux = dx / L
    uy = dy / L
    h = res * 0.25
    n = int(L / h) + 1
    H, W = cells.shape
    for k in range(n + 1):
        t = k * h
        if t > L:
            t = L
        px = cx + ux * t
        py = cy + uy * t
        ix = int(np.floor(px / res))
        iy = int(np.floor(py / res))
        if ix < 0 or iy < 0 or ix >= W or iy >= H:
            return False
        if cells[iy, ix] != 0:
            if ix < bx0 or ix > bx1 or iy < by0 or iy > by1:
                return False
    return True


@njit(cache=True)
def dense_cell_bins(cells, res, row, col, sxs, sys, sobj, ocls, obox, nbins, out):
    """Visible bearing bins per class from one cell center, dense march.

    out is a (classes, nbins) uint8 array; a bin is set when any sample
    of that class is visible from the cell center.
    """
    two_pi = 2.0 * np.pi
    bw = two_pi / nbins
    cx = (col + 0.5) * res
    cy = (row + 0.5) * res
    for s in range(sxs.shape[0]):
        ang = np.arctan2(sys[s] - cy, sxs[s] - cx)
        if ang < 0.0:
            ang += two_pi
        b = int(ang / bw)
        if b >= nbins:
            b = nbins - 1
        o = sobj[s]
        if out[ocls[o], b]:
            continue
        if dense_segment_visible(
            cells, res, cx, cy, sxs[s], sys[s], obox[o, 0], obox[o, 1], obox[o, 2], obox[o, 3]
        ):
            out[ocls[o], b] = 1


@njit(cache=True)
def dense_world_bins(cells, res, rows, cols, sxs, sys, sobj, ocls, obox, nbins, out):
    """dense_cell_bins over a batch of cells; out is (cells, classes, nbins)."""
    for i in range(rows.shape[0]):
        dense_cell_bins(
            cells, res, rows[i], cols[i], sxs, sys, sobj, ocls, obox, nbins, out[i]
        )


def brute_knn_category(vectors, categories, feature, k):
    """Exhaustive k-nearest-neighbor vote: Euclidean distance, stable
    order among ties, majority vote broken by the earliest training row."""
    d = [float(np.sum((np.asarray(v, float) - np.asarray(feature, float)) ** 2)) for v in vectors]
    order = sorted(range(len(d)), key=lambda i: (d[i], i))[:k]
    tally = {}
    for i in order:
        cat = categories[i]
        count, first = tally.get(cat, (0, i))
        tally[cat] = (count + 1, min(first, i))
    best = None
    for cat, (count, first) in tally.items():
        if best is None:
            best = (count, -first, cat)
        elif (count, -first) > best[:2]:
            best = (count, -first, cat)
    return best[2]


def brute_ray_range(cells, res, x0, y0, angle, range_max):
    """First occupied sample at res/2 spacing, starting one step out from
    the sensor; None when the ray dies in unknown space, leaves the map,
    or exceeds range_max without a return."""
    h = res * 0.5
    ux, uy = np.cos(angle), np.sin(angle)
    H, W = cells.shape
    k = 1
    while True:
        t = k * h
        if t > range_max:
            return None
        ix = int(np.floor((x0 + ux * t) / res))
        iy = int(np.floor((y0 + uy * t) / res))
        if ix < 0 or iy < 0 or ix >= W or iy >= H:
            return None
        v = cells[iy, ix]
        if v == OCCUPIED:
            return t
        if v == UNKNOWN:
            return None
        k += 1
