"""Deformation kernels and footprint job stepping."""

import logging
import math

import numpy as np
import pytest

from terradeform.contact import FootCollider, contact_window
from terradeform.deformation import (FootprintJob, displaced_volume,
                                     frame_accumulation, frame_compression,
                                     target_accumulation, target_compression)
from terradeform.forces import ImpulseWindow
from terradeform.heightfield import new_heightfield
from terradeform.materials import MaterialParams


def test_target_compression_linear():
    assert target_compression(100e3, 0.3, 1e6) == pytest.approx(0.03)
    assert target_compression(0.0, 0.3, 1e6) == 0.0


def test_target_compression_clamped_to_loose_depth():
    assert target_compression(10e6, 0.3, 1e6) == 0.3


def test_target_compression_validation():
    with pytest.raises(ValueError):
        target_compression(1.0, 0.3, 0.0)
    with pytest.raises(ValueError):
        target_compression(-1.0, 0.3, 1e6)


def test_frame_compression_rate():
    assert frame_compression(0.03, 0.0, 1 / 60, 0.2) == pytest.approx(0.0025)


def test_frame_compression_gate_closed():
    assert frame_compression(0.03, 0.03, 1 / 60, 0.2) == 0.0
    assert frame_compression(0.03, 0.05, 1 / 60, 0.2) == 0.0


def test_frame_compression_remainder_clamp():
    assert frame_compression(0.03, 0.029, 1 / 60, 0.2) == pytest.approx(0.001)


def test_displaced_volume():
    assert displaced_volume(0.0, 0.01, 0.02) == 0.0
    assert displaced_volume(0.5, 0.01, 0.02) == pytest.approx(2e-4)
    assert displaced_volume(0.35, 0.0144, 0.01) == pytest.approx(1.008e-4)
    with pytest.raises(ValueError):
        displaced_volume(0.7, 0.01, 0.02)


def test_target_accumulation():
    assert target_accumulation(2e-4, 0.0016, 25) == pytest.approx(0.005)
    assert target_accumulation(0.0, 0.0016, 25) == 0.0


def test_target_accumulation_degenerate_ring_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert target_accumulation(1e-4, 0.0016, 0) == 0.0
    assert any("dropping" in rec.message for rec in caplog.records)


def test_frame_accumulation():
    assert frame_accumulation(0.005, 0.0, 1 / 60, 0.2) == pytest.approx(0.005 / 12)
    assert frame_accumulation(0.005, 0.005, 1 / 60, 0.2) == 0.0
    assert frame_accumulation(0.005, 0.0049, 1 / 60, 0.2) == pytest.approx(1e-4)


# -- job stepping -------------------------------------------------------------


def make_material(E=1e6, nu=0.0, tau=0.2, L0=0.3):
    return MaterialParams(young_modulus=E, poisson_ratio=nu, char_time=tau,
                          loose_depth=L0, blur_sigma_cm=0.5, contour_radius=0.04)


def make_job(field, mat, cell=(50, 50), half=0.05, t0=0.0, impulse=None):
    """Job whose foot presses at a cell center and rides the sinking
    surface, the way foot placement re-seats a pinned foot every frame."""
    x, z = field.cell_center(*cell)
    i, j = cell

    def collider():
        bottom = (field.base_height[i, j] - field.c_acc[i, j]
                  + field.h_acc[i, j])
        return FootCollider(center=(x, bottom + 0.02, z),
                            half_extents=(half, 0.02, half))

    window = contact_window((x, z), 0.4, field)
    win = ImpulseWindow(impulse if impulse is not None else np.zeros(3),
                        t0, mat.char_time)
    return FootprintJob("left", window, win, mat, collider_fn=collider,
                        cell_area=field.cell_area)


def run_constant_force(field, job, force, dt, n_frames):
    traces = {}
    for k in range(n_frames):
        job.step(field, force, k * dt, dt)
        for key in job.carved_by_cell:
            traces.setdefault(key, []).append(field.c_acc[key])
    return traces


def test_constant_force_reaches_target_in_ramp_frames():
    field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
    mat = make_material(E=1e6, tau=0.2)
    job = make_job(field, mat)
    force = np.array([0.0, -1440.0, 0.0])  # 9 cells -> sigma = 100 kPa
    dt = 1 / 60
    sigma = 1440.0 / (9 * field.cell_area)
    delta_l = target_compression(sigma, mat.loose_depth, mat.young_modulus)
    ramp_frames = math.ceil(mat.char_time / dt)

    for k in range(ramp_frames):
        assert job.active
        job.step(field, force, k * dt, dt)
    hit_values = [field.c_acc[c] for c in job.carved_by_cell]
    assert len(hit_values) == 9
    for v in hit_values:
        assert v == pytest.approx(delta_l, rel=1e-12)


def test_job_completes_after_window_and_gates():
    field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
    mat = make_material(tau=0.05)
    job = make_job(field, mat)
    force = np.array([0.0, -500.0, 0.0])
    dt = 1 / 60
    k = 0
    while job.active and k < 100:
        job.step(field, force, k * dt, dt)
        k += 1
    assert not job.active
    # compression finished by ceil(tau/dt) frames; completion when the
    # release window has also passed
    assert k <= math.ceil(mat.char_time / dt) + 2


def test_zero_force_job_completes_immediately():
    field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
    job = make_job(field, make_material())
    job.step(field, np.zeros(3), 0.0, 1 / 60)
    assert not job.active
    assert field.c_acc.max() == 0.0


def test_second_stomp_same_force_adds_nothing():
    field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
    mat = make_material(tau=0.05)
    force = np.array([0.0, -900.0, 0.0])
    dt = 1 / 60

    job1 = make_job(field, mat)
    k = 0
    while job1.active and k < 50:
        job1.step(field, force, k * dt, dt)
        k += 1
    carved_first = field.c_acc.copy()
    assert carved_first.max() > 0

    job2 = make_job(field, mat)
    k = 0
    while job2.active and k < 50:
        job2.step(field, force, k * dt, dt)
        k += 1
    np.testing.assert_array_equal(field.c_acc, carved_first)
    assert job2.carved_volume == 0.0


def final_depth(E=1e6, fy=900.0, tau=0.2, nu=0.0, frames=60):
    field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
    mat = make_material(E=E, nu=nu, tau=tau)
    job = make_job(field, mat)
    force = np.array([0.0, -fy, 0.0])
    dt = 1 / 60
    for k in range(frames):
        if not job.active:
            break
        job.step(field, force, k * dt, dt)
    return field.c_acc.max(), field, job


def test_monotone_in_stress_and_stiffness():
    base, _, _ = final_depth(E=1e6, fy=900.0)
    stronger, _, _ = final_depth(E=1e6, fy=1800.0)
    stiffer, _, _ = final_depth(E=2e6, fy=900.0)
    assert stronger > base > stiffer


def test_final_depth_independent_of_tau_for_sustained_force():
    fast, _, _ = final_depth(tau=0.05, frames=120)
    slow, _, _ = final_depth(tau=0.4, frames=120)
    assert fast == pytest.approx(slow, rel=1e-9)


def test_volume_conservation_incompressible_single_job():
    depth, field, job = final_depth(nu=0.5, fy=900.0, frames=90)
    assert depth > 0
    carved = job.carved_volume
    bump = job.bump_volume
    assert bump == pytest.approx(carved, rel=0.01)
    assert field.bump_volume() == pytest.approx(bump, rel=1e-9)


def test_no_bump_for_fully_compressible():
    _, field, job = final_depth(nu=0.0, fy=900.0)
    assert field.h_acc.max() == 0.0
    assert job.bump_volume == 0.0


def test_job_step_deterministic():
    def run():
        field = new_heightfield(4.0, 4.0, 100, 100, lambda x, z: 0.0)
        mat = make_material(nu=0.35, tau=0.1)
        job = make_job(field, mat)
        force = np.array([2.0, -1200.0, 1.0])
        for k in range(40):
            job.step(field, force, k / 60, 1 / 60)
        return field.c_acc.copy(), field.h_acc.copy()
    c1, h1 = run()
    c2, h2 = run()
    assert np.array_equal(c1, c2)
    assert np.array_equal(h1, h2)
