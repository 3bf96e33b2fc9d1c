"""Contact queries: windows, ray-cast hits, contour rings.

The checks compare against brute-force enumeration oracles that scan every
grid cell independently of the production code paths.
"""

import numpy as np
import pytest

from terradeform.contact import (FootCollider, SphereCollider, contact_window,
                                 contour_cells, detect_hits)
from terradeform.heightfield import new_heightfield


def flat_field(width=10.0, depth=10.0, n=250, height=0.0):
    # cell size 0.04 m by default
    return new_heightfield(width, depth, n, n, lambda x, z: height)


def enumerate_window(field, center, side):
    """Oracle: scan all cells for centers inside the square."""
    out = []
    half = side / 2.0
    for i in range(field.nx):
        for j in range(field.nz):
            x, z = field.cell_center(i, j)
            if abs(x - center[0]) <= half and abs(z - center[1]) <= half:
                out.append((i, j))
    return sorted(out)


def enumerate_box_hits(field, window, collider):
    """Oracle: box-vs-vertical-ray test per cell center."""
    cx, cy, cz = collider.center
    hx, hy, hz = collider.half_extents
    surf = field.raw_surface()
    out = []
    for i, j in window:
        x, z = field.cell_center(i, j)
        if abs(x - cx) <= hx and abs(z - cz) <= hz and (cy - hy) <= surf[i, j]:
            out.append((i, j))
    return sorted(out)


def test_window_counts_standard_setup():
    f = flat_field()
    cells = contact_window((5.013, 4.987), 0.40, f)
    assert len(cells) == 100  # 10 x 10 cells for a 0.40 m window on 0.04 m cells


def test_window_single_cell():
    f = flat_field()
    cells = contact_window((5.013, 4.987), 0.01, f)
    assert len(cells) == 1


def test_window_clipped_at_edge():
    f = flat_field()
    cells = contact_window((0.1, 5.013), 0.40, f)
    assert 0 < len(cells) < 100
    assert sorted(map(tuple, cells)) == enumerate_window(f, (0.1, 5.013), 0.40)


@pytest.mark.parametrize("center", [(5.013, 4.987), (0.1, 5.013), (9.9, 9.9),
                                    (3.02, 0.02)])
def test_window_matches_enumeration(center):
    f = new_heightfield(10.0, 10.0, 100, 100, lambda x, z: 0.0)  # 0.1 m cells
    cells = contact_window(center, 0.35, f)
    assert sorted(map(tuple, cells)) == enumerate_window(f, center, 0.35)


def test_window_errors():
    f = flat_field()
    with pytest.raises(ValueError):
        contact_window((5.0, 5.0), 0.0, f)
    with pytest.raises(ValueError):
        contact_window((11.0, 5.0), 0.4, f)


def centered_foot(field, i, j, bottom, half=0.05):
    x, z = field.cell_center(i, j)
    return FootCollider(center=(x, bottom + 0.02, z),
                        half_extents=(half, 0.02, half))


def test_no_hits_when_foot_above_surface():
    f = flat_field()
    foot = centered_foot(f, 125, 125, bottom=0.01)
    window = contact_window(f.cell_center(125, 125), 0.4, f)
    patch = detect_hits(foot, window, f)
    assert patch.num_hits == 0
    assert patch.contact_area == 0.0


def test_box_foot_at_surface_nine_cells():
    f = flat_field()
    foot = centered_foot(f, 125, 125, bottom=0.0)
    window = contact_window(f.cell_center(125, 125), 0.4, f)
    patch = detect_hits(foot, window, f)
    assert patch.num_hits == 9  # 3x3 centers within +/-0.05 m
    assert patch.contact_area == pytest.approx(9 * 0.04 * 0.04)
    assert sorted(map(tuple, patch.hit_cells)) == \
        enumerate_box_hits(f, window, foot)


def test_sunk_foot_same_hit_set():
    f = flat_field()
    window = contact_window(f.cell_center(125, 125), 0.4, f)
    at_surface = detect_hits(centered_foot(f, 125, 125, bottom=0.0), window, f)
    sunk = detect_hits(centered_foot(f, 125, 125, bottom=-0.05), window, f)
    assert np.array_equal(at_surface.hit_cells, sunk.hit_cells)


def test_hits_match_enumeration_off_center():
    f = flat_field()
    foot = FootCollider(center=(5.007, 0.017, 4.981),
                        half_extents=(0.06, 0.02, 0.04))
    window = contact_window((5.007, 4.981), 0.4, f)
    patch = detect_hits(foot, window, f)
    assert sorted(map(tuple, patch.hit_cells)) == \
        enumerate_box_hits(f, window, foot)


def test_grid_equivariance_under_integer_shift():
    f = flat_field(n=125, width=5.0, depth=5.0)
    f.c_acc[40:44, 50:54] = 0.02  # carve a dent the foot partially overlaps
    foot = centered_foot(f, 42, 52, bottom=-0.02)
    window = contact_window(f.cell_center(42, 52), 0.4, f)
    patch = detect_hits(foot, window, f, contour_radius=0.04)

    shift = 7
    f2 = flat_field(n=125, width=5.0, depth=5.0)
    f2.c_acc[40 + shift:44 + shift, 50 + shift:54 + shift] = 0.02
    foot2 = centered_foot(f2, 42 + shift, 52 + shift, bottom=-0.02)
    window2 = contact_window(f2.cell_center(42 + shift, 52 + shift), 0.4, f2)
    patch2 = detect_hits(foot2, window2, f2, contour_radius=0.04)

    assert np.array_equal(patch.hit_cells + shift, patch2.hit_cells)
    assert np.array_equal(patch.contour_cells + shift, patch2.contour_cells)
    assert patch.contact_area == patch2.contact_area


def test_contour_empty_input():
    f = flat_field()
    ring = contour_cells(np.empty((0, 2), dtype=np.int64), 0.04, f)
    assert ring.shape == (0, 2)


def test_contour_single_cell_four_neighbors():
    f = flat_field()
    hits = np.array([[100, 100]])
    ring = contour_cells(hits, 0.04, f)
    assert sorted(map(tuple, ring)) == [(99, 100), (100, 99), (100, 101),
                                        (101, 100)]


def test_contour_three_by_three_ring_of_twelve():
    f = flat_field()
    hits = np.array([(i, j) for i in (99, 100, 101) for j in (99, 100, 101)])
    ring = contour_cells(hits, 0.04, f)
    assert len(ring) == 12
    ring_set = {tuple(c) for c in ring}
    assert ring_set.isdisjoint({tuple(h) for h in hits})
    # orthogonal ring only: corner diagonals are sqrt(2) cells > radius
    assert (98, 98) not in ring_set
    assert (98, 100) in ring_set


def test_contour_matches_distance_enumeration():
    f = new_heightfield(10.0, 10.0, 250, 250, lambda x, z: 0.0)
    hits = np.array([(i, j) for i in range(118, 126) for j in range(97, 101)])
    radius = 0.09
    ring = contour_cells(hits, radius, f)
    hit_set = {tuple(h) for h in hits}
    boundary = [c for c in hit_set
                if not {(c[0] - 1, c[1]), (c[0] + 1, c[1]),
                        (c[0], c[1] - 1), (c[0], c[1] + 1)} <= hit_set]
    expected = set()
    for i in range(f.nx):
        for j in range(f.nz):
            if (i, j) in hit_set:
                continue
            for (bi, bj) in boundary:
                d2 = ((i - bi) ** 2 + (j - bj) ** 2) * f.cell_size ** 2
                if d2 <= radius * radius:
                    expected.add((i, j))
                    break
    assert {tuple(c) for c in ring} == expected


def test_contour_clipped_at_grid_edge():
    f = flat_field()
    ring = contour_cells(np.array([[0, 0]]), 0.04, f)
    assert sorted(map(tuple, ring)) == [(0, 1), (1, 0)]


def test_sphere_collider_geometry():
    s = SphereCollider(center=(1.0, 0.5, 1.0), radius=0.25)
    assert s.footprint_contains(1.2, 1.0)
    assert not s.footprint_contains(1.26, 1.0)
    assert s.lowest_y_at(1.0, 1.0) == pytest.approx(0.25)
    assert s.lowest_y_at(1.25, 1.0) == pytest.approx(0.5)


def test_sphere_hits_match_enumeration():
    f = flat_field(width=4.0, depth=4.0, n=100)
    sphere = SphereCollider(center=(2.02, 0.22, 1.98), radius=0.25)
    window = contact_window((2.02, 1.98), 0.8, f)
    patch = detect_hits(sphere, window, f)
    surf = f.raw_surface()
    expected = []
    for i, j in window:
        x, z = f.cell_center(i, j)
        d2 = (x - 2.02) ** 2 + (z - 1.98) ** 2
        if d2 <= 0.25 ** 2 and 0.22 - np.sqrt(0.25 ** 2 - d2) <= surf[i, j]:
            expected.append((i, j))
    assert sorted(map(tuple, patch.hit_cells)) == sorted(expected)
    assert patch.num_hits > 0


def test_collider_validation():
    with pytest.raises(ValueError):
        FootCollider(center=(0, 0, 0), half_extents=(0.05, 0.0, 0.05))
    with pytest.raises(ValueError):
        SphereCollider(center=(0, 0, 0), radius=0.0)
