"""Foot-to-terrain contact detection on the cell grid.

A contact query runs in three stages: a fixed bounding window of cells is
chosen around the initial touch point, a vertical ray is cast at each cell
center against the collider, and the ring of cells just outside the hit
set is collected to receive displaced material.

A cell is a hit when the collider's footprint covers the cell center and
the collider's lowest point above that center is at or below the cell's
raw surface (ties count). The contact area is exactly
``hit count * cell_area`` because heights are registered at cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heightfield import Heightfield


# a pressed collider counts as touching anything within this height slack;
# exact-touch ties must stay hits under one-ulp float noise (a foot seated
# on the surface it is compressing is the common case, not the edge case)
SEAT_EPSILON = 1e-9


@dataclass(frozen=True)
class FootCollider:
    """Axis-aligned box proxy for a foot: center and half extents (m)."""

    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise ValueError("half extents must be positive")

    def footprint_contains(self, x: float, z: float) -> bool:
        cx, _, cz = self.center
        hx, _, hz = self.half_extents
        return abs(x - cx) <= hx and abs(z - cz) <= hz

    def lowest_y_at(self, x: float, z: float) -> float:
        return self.center[1] - self.half_extents[1]


@dataclass(frozen=True)
class SphereCollider:
    """Sphere proxy used by the drop scenario; same ray-cast interface."""

    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def footprint_contains(self, x: float, z: float) -> bool:
        cx, _, cz = self.center
        return (x - cx) ** 2 + (z - cz) ** 2 <= self.radius ** 2

    def lowest_y_at(self, x: float, z: float) -> float:
        cx, cy, cz = self.center
        d2 = (x - cx) ** 2 + (z - cz) ** 2
        return cy - np.sqrt(max(self.radius ** 2 - d2, 0.0))


@dataclass(frozen=True)
class ContactPatch:
    """Result of one ray-cast pass over a contact window.

    ``hit_cells`` and ``contour_cells`` are (k, 2) int arrays of (i, j)
    pairs in row-major order; the two sets are disjoint.
    """

    hit_cells: np.ndarray
    contour_cells: np.ndarray
    num_hits: int
    contact_area: float


def contact_window(foot_center: tuple[float, float], window_side: float,
                   field: Heightfield) -> np.ndarray:
    """Cells whose centers lie in the axis-aligned square around a point.

    The square has side ``window_side`` and is clipped to the grid. Returns
    a (k, 2) int array of (i, j) pairs, row-major. The window is fixed at
    the initial contact position for the lifetime of a footprint.
    """
    if window_side <= 0:
        raise ValueError("window side must be positive")
    cx, cz = foot_center
    if not field.in_extent(cx, cz):
        raise ValueError(f"window center ({cx}, {cz}) outside terrain")
    cs = field.cell_size
    half = window_side / 2.0
    # cell centers at (i + 0.5) * cs; inclusive comparison against the square
    i_lo = max(int(np.ceil((cx - half) / cs - 0.5)), 0)
    i_hi = min(int(np.floor((cx + half) / cs - 0.5)), field.nx - 1)
    j_lo = max(int(np.ceil((cz - half) / cs - 0.5)), 0)
    j_hi = min(int(np.floor((cz + half) / cs - 0.5)), field.nz - 1)
    if i_lo > i_hi:
        # window narrower than a cell: fall back to the containing cell
        i_lo = i_hi = min(max(int(cx / cs), 0), field.nx - 1)
    if j_lo > j_hi:
        j_lo = j_hi = min(max(int(cz / cs), 0), field.nz - 1)
    ii, jj = np.meshgrid(np.arange(i_lo, i_hi + 1), np.arange(j_lo, j_hi + 1),
                         indexing="ij")
    return np.column_stack((ii.ravel(), jj.ravel()))


def detect_hits(collider, window: np.ndarray, field: Heightfield,
                contour_radius: float | None = None) -> ContactPatch:
    """Ray-cast every window cell against a collider.

    A vertical ray at a cell center hits when the collider footprint covers
    the center and the collider bottom there is at or below the cell's raw
    surface. Zero hits is a valid patch with zero area.
    """
    if window.shape[0] == 0:
        empty = np.empty((0, 2), dtype=np.int64)
        return ContactPatch(empty, empty, 0, 0.0)
    cs = field.cell_size
    xs = (window[:, 0] + 0.5) * cs
    zs = (window[:, 1] + 0.5) * cs
    surface = (field.base_height[window[:, 0], window[:, 1]]
               - field.c_acc[window[:, 0], window[:, 1]]
               + field.h_acc[window[:, 0], window[:, 1]])
    mask = np.zeros(len(window), dtype=bool)
    for k in range(len(window)):
        if collider.footprint_contains(xs[k], zs[k]):
            mask[k] = collider.lowest_y_at(xs[k], zs[k]) <= surface[k] + SEAT_EPSILON
    hits = window[mask]
    contour = contour_cells(hits, contour_radius, field) if contour_radius \
        else np.empty((0, 2), dtype=np.int64)
    return ContactPatch(hits, contour, int(len(hits)),
                        float(len(hits)) * field.cell_area)


def contour_cells(hit_cells: np.ndarray, spread_radius: float,
                  field: Heightfield) -> np.ndarray:
    """Exterior ring of a hit set: non-hit cells within the spread radius
    (center-to-center Euclidean distance) of some boundary hit cell.

    A hit cell is a boundary cell when at least one of its 4-neighbors is
    not a hit (grid edges count as non-hit). Empty input gives an empty
    ring. Returned as a (k, 2) int array, row-major order.
    """
    if hit_cells.shape[0] == 0:
        return np.empty((0, 2), dtype=np.int64)
    hit_set = {(int(i), int(j)) for i, j in hit_cells}
    boundary = [
        (i, j) for (i, j) in hit_set
        if ((i - 1, j) not in hit_set or (i + 1, j) not in hit_set
            or (i, j - 1) not in hit_set or (i, j + 1) not in hit_set)
    ]
    cs = field.cell_size
    r2 = spread_radius * spread_radius
    reach = int(np.floor(spread_radius / cs + 1e-12))
    ring: set[tuple[int, int]] = set()
    for (bi, bj) in boundary:
        for di in range(-reach, reach + 1):
            for dj in range(-reach, reach + 1):
                if (di * di + dj * dj) * cs * cs > r2:
                    continue
                ci, cj = bi + di, bj + dj
                if (ci, cj) in hit_set:
                    continue
                if 0 <= ci < field.nx and 0 <= cj < field.nz:
                    ring.add((ci, cj))
    if not ring:
        return np.empty((0, 2), dtype=np.int64)
    return np.array(sorted(ring), dtype=np.int64)
