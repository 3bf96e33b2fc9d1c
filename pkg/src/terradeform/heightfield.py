"""Deformable terrain heightfield.

The terrain is a dense 2D grid of square cells. Each cell carries three
scalars:

  base_height   top surface of the loose soil layer at rest
  c_acc         accumulated plastic compression (only ever grows, capped
                at the loose-layer depth)
  h_acc         accumulated displaced material piled on top (only grows)

The raw surface at a cell is ``base_height - c_acc + h_acc``. Heights are
sampled at cell centers, so a cell owns a ``cell_size x cell_size``
footprint and contact areas computed from hit counts are exact.

Everything below the loose layer is rigid: compression saturates at the
loose depth passed by the caller. Both accumulators are plastic, i.e.
monotone non-decreasing over simulation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.ndimage import correlate1d


@dataclass(frozen=True)
class CellIndex:
    """Integer grid coordinates (i along x/width, j along z/depth)."""

    i: int
    j: int


class Heightfield:
    """Square-cell terrain grid with plastic compression and pile-up.

    ``base_height``, ``c_acc`` and ``h_acc`` are (nx, nz) float64 arrays
    indexed [i, j] with i along x and j along z.
    """

    def __init__(self, width_m: float, depth_m: float, nx: int, nz: int,
                 base_fn: Callable[[float, float], float]):
        if width_m <= 0 or depth_m <= 0:
            raise ValueError("terrain dimensions must be positive")
        if nx < 2 or nz < 2:
            raise ValueError("grid must be at least 2x2 cells")
        csx = width_m / nx
        csz = depth_m / nz
        if abs(csx - csz) > 1e-12 * max(csx, csz):
            raise ValueError("cells must be square (width_m/nx == depth_m/nz)")
        self.width_m = float(width_m)
        self.depth_m = float(depth_m)
        self.nx = int(nx)
        self.nz = int(nz)
        self.cell_size = csx
        xs = (np.arange(nx) + 0.5) * csx
        zs = (np.arange(nz) + 0.5) * csz
        self.base_height = np.empty((nx, nz), dtype=np.float64)
        for i, x in enumerate(xs):
            for j, z in enumerate(zs):
                self.base_height[i, j] = base_fn(x, z)
        self.c_acc = np.zeros((nx, nz), dtype=np.float64)
        self.h_acc = np.zeros((nx, nz), dtype=np.float64)

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.cell_size, (j + 0.5) * self.cell_size)

    def raw_surface(self) -> np.ndarray:
        """Current surface heights, one value per cell (no display blur)."""
        return self.base_height - self.c_acc + self.h_acc

    def in_extent(self, x: float, z: float) -> bool:
        return 0.0 <= x <= self.width_m and 0.0 <= z <= self.depth_m

    def surface_height_at(self, x: float, z: float) -> float:
        """Bilinear interpolation of the raw surface at a world point.

        Queries in the half-cell margin between the border cell centers and
        the terrain edge clamp to the border cells. A query at an exact cell
        center returns that cell's raw height exactly.
        """
        if not self.in_extent(x, z):
            raise ValueError(f"query ({x}, {z}) outside terrain extent")
        cs = self.cell_size
        # fractional index into the cell-center lattice, clamped to it;
        # queries at exact cell centers must hit the cell value exactly, so
        # snap away the one-ulp noise the division introduces
        fi = min(max(x / cs - 0.5, 0.0), float(self.nx - 1))
        fj = min(max(z / cs - 0.5, 0.0), float(self.nz - 1))
        if abs(fi - round(fi)) < 1e-9:
            fi = float(round(fi))
        if abs(fj - round(fj)) < 1e-9:
            fj = float(round(fj))
        i0 = min(int(fi), self.nx - 2)
        j0 = min(int(fj), self.nz - 2)
        tx = fi - i0
        tz = fj - j0

        def cell(i: int, j: int) -> float:
            return self.base_height[i, j] - self.c_acc[i, j] + self.h_acc[i, j]

        h00 = cell(i0, j0)
        h10 = cell(i0 + 1, j0)
        h01 = cell(i0, j0 + 1)
        h11 = cell(i0 + 1, j0 + 1)
        return (h00 * (1 - tx) * (1 - tz) + h10 * tx * (1 - tz)
                + h01 * (1 - tx) * tz + h11 * tx * tz)

    def surface_gradient_at(self, x: float, z: float) -> tuple[float, float]:
        """Central-difference slope (dh/dx, dh/dz) of the raw surface."""
        cs = self.cell_size
        xa = max(x - cs, 0.0)
        xb = min(x + cs, self.width_m)
        za = max(z - cs, 0.0)
        zb = min(z + cs, self.depth_m)
        dhdx = (self.surface_height_at(xb, z) - self.surface_height_at(xa, z)) / (xb - xa)
        dhdz = (self.surface_height_at(x, zb) - self.surface_height_at(x, za)) / (zb - za)
        return dhdx, dhdz

    # -- deformation -------------------------------------------------------

    def apply_compression(self, cell: CellIndex, c_frame: float, loose_depth: float) -> None:
        """Add one frame of compression to a cell, saturating at the loose depth."""
        if c_frame < 0:
            raise ValueError("compression increment must be non-negative")
        self.c_acc[cell.i, cell.j] = min(self.c_acc[cell.i, cell.j] + c_frame,
                                         loose_depth)

    def apply_accumulation(self, cell: CellIndex, h_frame: float) -> None:
        """Add one frame of piled-up material to a cell."""
        if h_frame < 0:
            raise ValueError("accumulation increment must be non-negative")
        self.h_acc[cell.i, cell.j] += h_frame

    def apply_compression_cells(self, ii: np.ndarray, jj: np.ndarray,
                                c_frames: np.ndarray, loose_depth: float) -> None:
        """Vectorized compression over distinct cells; same math as the scalar op."""
        if np.any(c_frames < 0):
            raise ValueError("compression increments must be non-negative")
        self.c_acc[ii, jj] = np.minimum(self.c_acc[ii, jj] + c_frames, loose_depth)

    def apply_accumulation_cells(self, ii: np.ndarray, jj: np.ndarray,
                                 h_frames: np.ndarray) -> None:
        if np.any(h_frames < 0):
            raise ValueError("accumulation increments must be non-negative")
        self.h_acc[ii, jj] += h_frames

    # -- bookkeeping -------------------------------------------------------

    def carved_volume(self, window: Iterable[CellIndex] | None = None) -> float:
        """Total compressed volume (m^3) over a cell set, or the whole grid."""
        if window is None:
            return float(self.c_acc.sum() * self.cell_area)
        return float(sum(self.c_acc[c.i, c.j] for c in window) * self.cell_area)

    def bump_volume(self, window: Iterable[CellIndex] | None = None) -> float:
        """Total piled-up volume (m^3) from the raw accumulator (not blurred)."""
        if window is None:
            return float(self.h_acc.sum() * self.cell_area)
        return float(sum(self.h_acc[c.i, c.j] for c in window) * self.cell_area)

    # -- display -----------------------------------------------------------

    def display_height(self, sigma_cm: float) -> np.ndarray:
        """Surface with the bump field smoothed for display.

        Returns ``base_height - c_acc + blur(h_acc)``. The blur is a
        normalized, separable Gaussian of standard deviation ``sigma_cm``
        (converted to cells), truncated at radius ceil(3 sigma), applied
        with mirrored boundaries so the total bump volume is conserved.
        The stored accumulators are left untouched.
        """
        if sigma_cm < 0:
            raise ValueError("blur width must be non-negative")
        return self.base_height - self.c_acc + gaussian_blur(
            self.h_acc, sigma_cm / 100.0 / self.cell_size)


def gaussian_blur(grid: np.ndarray, sigma_cells: float) -> np.ndarray:
    """Separable normalized Gaussian with symmetric (mirrored) boundaries.

    Conserves the grid sum exactly in exact arithmetic; identity for
    sigma_cells == 0.
    """
    if sigma_cells <= 0:
        return grid.copy()
    radius = int(np.ceil(3.0 * sigma_cells))
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(d * d) / (2.0 * sigma_cells * sigma_cells))
    weights /= weights.sum()
    out = correlate1d(grid, weights, axis=0, mode="reflect")
    return correlate1d(out, weights, axis=1, mode="reflect")


def new_heightfield(width_m: float, depth_m: float, nx: int, nz: int,
                    base_fn: Callable[[float, float], float]) -> Heightfield:
    """Build a terrain grid with heights sampled at cell centers."""
    return Heightfield(width_m, depth_m, nx, nz, base_fn)


def to_pgm(grid: np.ndarray) -> str:
    """Encode a height grid as a plain-text PGM ("P2") snapshot.

    maxval is 65535 and a comment line ``# hmin=<m> hmax=<m>`` defines the
    linear mapping ``value = round(65535 * (h - hmin) / (hmax - hmin))``.
    A constant grid is encoded with hmin == hmax and all values 0. Pixels
    are row-major: one row per j (depth index), i (width index) ascending
    within the row.
    """
    hmin = float(grid.min())
    hmax = float(grid.max())
    nx, nz = grid.shape
    lines = ["P2", f"# hmin={hmin!r} hmax={hmax!r}", f"{nx} {nz}", "65535"]
    if hmax > hmin:
        values = np.rint(65535.0 * (grid - hmin) / (hmax - hmin)).astype(np.int64)
    else:
        values = np.zeros((nx, nz), dtype=np.int64)
    for j in range(nz):
        lines.append(" ".join(str(int(values[i, j])) for i in range(nx)))
    return "\n".join(lines) + "\n"


def from_pgm(text: str) -> np.ndarray:
    """Decode a snapshot written by :func:`to_pgm` back into a height grid."""
    lines = text.strip().splitlines()
    if lines[0].strip() != "P2":
        raise ValueError("not a plain-text PGM")
    comment = lines[1]
    if not comment.startswith("# hmin="):
        raise ValueError("missing height-range comment")
    parts = comment[2:].split()
    hmin = float(parts[0].split("=", 1)[1])
    hmax = float(parts[1].split("=", 1)[1])
    nx, nz = (int(v) for v in lines[2].split())
    maxval = int(lines[3])
    flat = " ".join(lines[4:]).split()
    values = np.array([int(v) for v in flat], dtype=np.float64)
    grid = np.empty((nx, nz), dtype=np.float64)
    for j in range(nz):
        grid[:, j] = values[j * nx:(j + 1) * nx]
    if hmax > hmin:
        return hmin + grid * (hmax - hmin) / maxval
    return np.full((nx, nz), hmin)
