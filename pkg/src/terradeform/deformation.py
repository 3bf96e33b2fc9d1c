"""Footprint deformation engine.

Each foot-ground contact spawns a footprint job that owns a fixed window
of terrain cells. Every frame while active, the job re-casts rays inside
its window to get the live contact patch, converts the current foot force
into a compression target via the linear stress-strain rod model, and
rations both the downward compression and the sideways pile-up over the
material's characteristic time. Compression is plastic: a cell never
rebounds, and re-treading an existing print with the same force adds
nothing because the per-cell accumulator already meets the target.

The displaced volume that reappears as a bump around the print scales with
the Poisson ratio: zero for a fully compressible material, the full carved
volume at the incompressible limit.
"""

from __future__ import annotations

import logging

import numpy as np

from .contact import ContactPatch, detect_hits
from .forces import ImpulseWindow, normal_stress
from .heightfield import Heightfield
from .materials import MaterialParams

log = logging.getLogger(__name__)

_UP = np.array([0.0, 1.0, 0.0])


def target_compression(sigma: float, loose_depth: float, young_modulus: float) -> float:
    """Compression depth the current stress asks for, from the linear rod
    model, capped at the loose-layer depth (the substrate below is rigid)."""
    if young_modulus <= 0 or loose_depth <= 0:
        raise ValueError("modulus and loose depth must be positive")
    if sigma < 0:
        raise ValueError("stress must be non-negative")
    return min(sigma * loose_depth / young_modulus, loose_depth)


def frame_compression(delta_l: float, c_acc: float, dt: float, tau: float) -> float:
    """One frame's worth of compression toward the current target.

    The rate is dt/tau of the target; the final step is clamped to the
    remainder so the accumulator lands exactly on the target. Closed once
    the accumulator has reached the target.
    """
    if dt <= 0 or tau <= 0:
        raise ValueError("dt and tau must be positive")
    if c_acc >= delta_l:
        return 0.0
    return min(dt / tau * delta_l, delta_l - c_acc)


def displaced_volume(nu: float, contact_area: float, delta_l: float) -> float:
    """Sideways-displaced volume for a compression of delta_l over the
    contact area: 2 * nu * A * delta_l (compressive strain taken negative,
    so nu = 0 buries everything and nu = 0.5 conserves volume)."""
    if not 0.0 <= nu <= 0.5:
        raise ValueError("poisson ratio out of [0, 0.5]")
    return 2.0 * nu * contact_area * delta_l


def target_accumulation(delta_v: float, cell_area: float, num_neighbors: int) -> float:
    """Per-cell height increase that spreads the displaced volume uniformly
    over the contour ring. A degenerate empty ring drops the volume with a
    logged warning."""
    if cell_area <= 0:
        raise ValueError("cell area must be positive")
    if num_neighbors == 0:
        if delta_v > 0:
            log.warning("no contour cells available; dropping %.3e m^3 of "
                        "displaced volume", delta_v)
        return 0.0
    return delta_v / (cell_area * num_neighbors)


def frame_accumulation(delta_l_inc: float, acc_so_far: float, dt: float, tau: float) -> float:
    """One frame's worth of pile-up toward the current target; mirrors the
    compression rationing, gated on this job's own progress."""
    if dt <= 0 or tau <= 0:
        raise ValueError("dt and tau must be positive")
    if acc_so_far >= delta_l_inc:
        return 0.0
    return min(dt / tau * delta_l_inc, delta_l_inc - acc_so_far)


class FootprintJob:
    """One active foot-to-ground deformation process.

    The window is fixed at contact; the contact patch, stress and targets
    are recomputed from the live terrain and force every frame. The job
    stays active until the release window has passed and no cell still
    lags its target (a lifted foot keeps a running job alive until the
    carved shape is complete).
    """

    def __init__(self, foot: str, window: np.ndarray,
                 impulse_window: ImpulseWindow, material: MaterialParams,
                 collider_fn, cell_area: float):
        self.foot = foot
        self.window = window
        self.impulse_window = impulse_window
        self.material = material
        self.collider_fn = collider_fn  # () -> current collider for this foot
        self.cell_area = cell_area
        self.active = True
        self.t0 = impulse_window.t0
        # per-job pile-up progress, keyed by cell
        self._acc_progress: dict[tuple[int, int], float] = {}
        # job-local bookkeeping for summaries
        self.carved_by_cell: dict[tuple[int, int], float] = {}
        self.bump_volume = 0.0

    @property
    def carved_volume(self) -> float:
        return sum(self.carved_by_cell.values()) * self.cell_area

    @property
    def mean_depth(self) -> float:
        if not self.carved_by_cell:
            return 0.0
        return sum(self.carved_by_cell.values()) / len(self.carved_by_cell)

    def step(self, field: Heightfield, f_foot: np.ndarray, t: float, dt: float) -> bool:
        """Advance the job one frame; returns True while still active."""
        if not self.active:
            return False
        mat = self.material
        patch: ContactPatch = detect_hits(self.collider_fn(), self.window, field,
                                          contour_radius=mat.contour_radius)
        sigma = normal_stress(f_foot, _UP, patch.contact_area)
        delta_l = target_compression(sigma, mat.loose_depth, mat.young_modulus)

        gates_open = False
        if patch.num_hits > 0 and delta_l > 0.0:
            ii = patch.hit_cells[:, 0]
            jj = patch.hit_cells[:, 1]
            c_now = field.c_acc[ii, jj]
            inc = np.where(c_now < delta_l,
                           np.minimum(dt / mat.char_time * delta_l, delta_l - c_now),
                           0.0)
            if np.any(inc > 0.0):
                field.apply_compression_cells(ii, jj, inc, mat.loose_depth)
                for k in range(len(ii)):
                    if inc[k] > 0.0:
                        key = (int(ii[k]), int(jj[k]))
                        self.carved_by_cell[key] = self.carved_by_cell.get(key, 0.0) + inc[k]
            if np.any(field.c_acc[ii, jj] < delta_l):
                gates_open = True

        delta_v = displaced_volume(mat.poisson_ratio, patch.contact_area, delta_l)
        if delta_v > 0.0:
            n_nb = len(patch.contour_cells)
            delta_l_inc = target_accumulation(delta_v, field.cell_area, n_nb)
            if delta_l_inc > 0.0:
                incs = np.zeros(n_nb)
                for k in range(n_nb):
                    key = (int(patch.contour_cells[k, 0]), int(patch.contour_cells[k, 1]))
                    prog = self._acc_progress.get(key, 0.0)
                    h = frame_accumulation(delta_l_inc, prog, dt, mat.char_time)
                    if h > 0.0:
                        incs[k] = h
                        self._acc_progress[key] = prog + h
                if np.any(incs > 0.0):
                    field.apply_accumulation_cells(patch.contour_cells[:, 0],
                                                   patch.contour_cells[:, 1], incs)
                    self.bump_volume += float(incs.sum()) * field.cell_area
                if any(self._acc_progress.get((int(c[0]), int(c[1])), 0.0) < delta_l_inc
                       for c in patch.contour_cells):
                    gates_open = True

        pressing = max(-float(np.dot(f_foot, _UP)), 0.0)
        window_over = t > self.t0 + self.impulse_window.tau
        if not gates_open and (window_over or pressing == 0.0):
            self.active = False
        return self.active
