"""Character layer: inertia, control law, integrator, gait, foot pinning."""

import math

import numpy as np
import pytest

from terradeform.character import (CharacterState, GaitParams, GaitPlanner,
                                   capsule_transverse_inertia, controller_torque,
                                   gait_targets, pd_torque, place_feet,
                                   step_rigid_body)
from terradeform.forces import weight_ratio
from terradeform.heightfield import new_heightfield


def flat_field(width=10.0, depth=10.0, n=250, height=0.0):
    return new_heightfield(width, depth, n, n, lambda x, z: height)


def standing_character(x=5.0, z=5.0, width=0.2, mass=77.5):
    ch = CharacterState(mass=mass, height=1.8, capsule_radius=0.25,
                        gain_kp=30.0, gain_kd=6.0, foot_size=0.10,
                        root=np.array([x, 0.954, z]))
    ch.feet["left"].phase = "contact"
    ch.feet["left"].position = np.array([x, 0.0, z + width / 2])
    ch.feet["left"].pin_point = ch.feet["left"].position.copy()
    ch.feet["right"].phase = "contact"
    ch.feet["right"].position = np.array([x, 0.0, z - width / 2])
    ch.feet["right"].pin_point = ch.feet["right"].position.copy()
    return ch


# -- capsule inertia ----------------------------------------------------------


def test_capsule_inertia_sphere_limit():
    # height == diameter degenerates to a solid sphere: I = 2/5 m r^2
    with pytest.raises(ValueError):
        capsule_transverse_inertia(10.0, 0.5, 0.25)
    m, r = 10.0, 0.25
    almost_sphere = capsule_transverse_inertia(m, 2 * r + 1e-9, r)
    assert almost_sphere == pytest.approx(0.4 * m * r * r, rel=1e-5)


def test_capsule_inertia_rod_limit():
    # thin, long capsule approaches the rod moment m L^2 / 12
    m, h = 60.0, 2.0
    inertia = capsule_transverse_inertia(m, h, 0.01)
    assert inertia == pytest.approx(m * h * h / 12.0, rel=0.05)


def test_default_character_inertia_positive():
    ch = standing_character()
    assert 5.0 < ch.inertia < 50.0


# -- gait params ---------------------------------------------------------------


def test_gait_params_consistency_enforced():
    with pytest.raises(ValueError):
        GaitParams(forward_speed=1.0, step_length=2.0, step_period=1.0,
                   duty_factor=0.6, swing_lift=0.06, contact_speed=0.9)
    with pytest.raises(ValueError):
        GaitParams.from_speed(1.0, duty_factor=0.5)
    with pytest.raises(ValueError):
        GaitParams.from_speed(1.0, duty_factor=1.0)


def test_gait_params_from_speed():
    p = GaitParams.from_speed(1.65, step_period=0.8)
    assert p.step_length == pytest.approx(1.32)
    assert not p.standing
    assert GaitParams.from_speed(0.0).standing


# -- control law ---------------------------------------------------------------


def test_pd_torque_examples():
    assert pd_torque(0.1, 0.0, 30.0, 6.0) == pytest.approx(3.0)
    assert pd_torque(0.1, -0.5, 30.0, 6.0) == pytest.approx(0.0)


def test_controller_zero_at_equilibrium_exactly():
    field = flat_field()
    ch = standing_character()
    assert controller_torque(ch, field, 30.0, 6.0) == 0.0


@pytest.mark.parametrize("kp", [0.1, 1.0, 30.0, 120.0])
@pytest.mark.parametrize("kd", [0.1, 6.0, 40.0])
def test_controller_sign_on_ramp(kp, kd):
    slope = math.tan(math.radians(15.0))
    field = new_heightfield(10.0, 10.0, 250, 250, lambda x, z: slope * x)
    ch = standing_character(x=5.0)
    # move the body's ground point downhill of the support midpoint
    ch.root[0] = 4.8
    ch.tilt = 0.0
    ch.tilt_rate = 0.0
    torque = controller_torque(ch, field, kp, kd)
    # positive torque tilts the capsule forward, toward the uphill target
    assert torque > 0.0
    ch.root[0] = 5.2  # overshoot: target now behind
    assert controller_torque(ch, field, kp, kd) < 0.0


def test_controller_swing_term_opposes_rate():
    field = flat_field()
    ch = standing_character()
    ch.tilt_rate = 0.5
    assert controller_torque(ch, field, 30.0, 6.0) == pytest.approx(-3.0)


def test_step_rigid_body_fixed_point():
    ch = standing_character()
    ch.velocity = np.zeros(3)
    before = (ch.tilt, ch.tilt_rate, ch.root.copy())
    step_rigid_body(ch, 0.0, 1 / 60)
    assert ch.tilt == before[0]
    assert ch.tilt_rate == before[1]
    np.testing.assert_array_equal(ch.root, before[2])


def test_step_rigid_body_rate_increment():
    ch = standing_character()
    ch.inertia = 12.0
    step_rigid_body(ch, 3.0, 1 / 60)
    assert ch.tilt_rate == pytest.approx(3.0 / 12.0 / 60.0)


def test_step_rigid_body_semi_implicit_order():
    ch = standing_character()
    ch.inertia = 10.0
    dt = 0.1
    torque = 5.0
    # rate updates first, then the angle uses the fresh rate
    r1 = torque / 10.0 * dt
    theta1 = r1 * dt
    r2 = r1 + torque / 10.0 * dt
    theta2 = theta1 + r2 * dt
    step_rigid_body(ch, torque, dt)
    step_rigid_body(ch, torque, dt)
    assert ch.tilt_rate == pytest.approx(r2, rel=1e-12)
    assert ch.tilt == pytest.approx(theta2, rel=1e-12)


# -- gait generation ------------------------------------------------------------


def test_gait_targets_heel_strike_at_phase_zero():
    field = flat_field()
    params = GaitParams.from_speed(1.65)
    frame = gait_targets(params, 0.0, field, start_xz=(5.0, 5.0))
    left = frame.feet["left"]
    assert left.wants_contact
    assert left.position[1] == pytest.approx(0.0, abs=1e-12)


def test_gait_swing_apex_is_terrain_plus_lift():
    field = flat_field(height=0.25)
    params = GaitParams.from_speed(1.65, swing_lift=0.06)
    planner = GaitPlanner(params, field, (5.0, 5.0), root_offset=0.954)
    t_swing = (1 - params.duty_factor) * params.step_period
    apex_s = (t_swing - planner._descent_time(t_swing)) / t_swing
    # phase where the right foot sits at the swing apex
    phase = (0.5 + params.duty_factor + apex_s * (1 - params.duty_factor)) % 1.0
    frame = gait_targets(params, phase, field, start_xz=(5.0, 5.0))
    assert frame.feet["right"].position[1] == pytest.approx(0.25 + 0.06, abs=1e-9)


def test_gait_touchdown_speed_is_contact_speed():
    field = flat_field()
    params = GaitParams.from_speed(1.65, contact_speed=0.9)
    planner = GaitPlanner(params, field, (5.0, 5.0), root_offset=0.954)
    t_strike = 0.25 * params.step_period  # right foot lands at phase 0.5
    dt = 1 / 60
    tgt = planner.targets(t_strike - dt).feet["right"]
    assert tgt.velocity[0] == 0.0
    assert tgt.velocity[2] == 0.0
    assert tgt.velocity[1] == pytest.approx(-0.9, rel=1e-9)


def test_gait_standing_symmetric():
    field = flat_field()
    params = GaitParams.from_speed(0.0)
    frame = gait_targets(params, 0.0, field, start_xz=(5.0, 5.0))
    left, right = frame.feet["left"], frame.feet["right"]
    assert np.all(left.velocity == 0) and np.all(right.velocity == 0)
    ratio = weight_ratio((left.position[0], left.position[2]),
                         (right.position[0], right.position[2]),
                         frame.com_xz)
    assert ratio.value == 0.5


def test_gait_targets_rejects_bad_phase():
    field = flat_field()
    with pytest.raises(ValueError):
        gait_targets(GaitParams.from_speed(1.0), 1.0, field)


# -- foot placement --------------------------------------------------------------


class ManualTargets:
    """Hand-built GaitFrame substitute for targeted placement checks."""

    def __init__(self, **feet):
        self.feet = feet
        self.com_xz = (0.0, 0.0)


def make_target(pos, vel, wants_contact=False):
    from terradeform.character import FootTarget
    return FootTarget(np.asarray(pos, dtype=float),
                      np.asarray(vel, dtype=float), wants_contact)


def test_descending_foot_contacts_on_penetration_with_prev_velocity():
    field = flat_field()
    ch = standing_character()
    foot = ch.feet["left"]
    foot.phase = "swing"
    foot.pin_point = None
    foot.position = np.array([5.0, 0.02, 5.1])
    foot.velocity = np.array([0.0, -1.0, 0.0])
    dt = 1 / 60

    # frame 1: 1 cm above, descending at 1 m/s: no contact yet
    tgt = make_target([5.0, 0.01, 5.1], [0.0, -1.0, 0.0])
    right = make_target(ch.feet["right"].position, [0, 0, 0], wants_contact=True)
    events = place_feet(ch, ManualTargets(left=tgt, right=right), field, t=0.0)
    assert events == []
    assert foot.phase == "swing"

    # frame 2: target moved 1.67 cm down, now below the surface: contact
    tgt2 = make_target([5.0, 0.01 - dt * 1.0, 5.1], [0.0, -1.0, 0.0])
    events = place_feet(ch, ManualTargets(left=tgt2, right=right), field, t=dt)
    assert len(events) == 1
    ev = events[0]
    assert ev.foot == "left"
    np.testing.assert_allclose(ev.v_prev, [0.0, -1.0, 0.0])
    assert foot.phase == "contact"
    assert foot.position[1] == 0.0


def test_pinned_foot_tracks_sinking_surface_and_root_follows():
    field = flat_field()
    ch = standing_character()
    stance = ManualTargets(
        left=make_target(ch.feet["left"].position, [0, 0, 0], True),
        right=make_target(ch.feet["right"].position, [0, 0, 0], True))
    place_feet(ch, stance, field, t=0.0)
    root_before = ch.root[1]

    # compress the terrain 2 cm under both feet
    field.c_acc[:, :] = 0.02
    place_feet(ch, stance, field, t=1 / 60)
    assert ch.feet["left"].position[1] == pytest.approx(-0.02)
    assert ch.root[1] == pytest.approx(root_before - 0.02)


def test_pinned_foot_never_slides():
    field = flat_field()
    ch = standing_character()
    stance = ManualTargets(
        left=make_target(ch.feet["left"].position, [0, 0, 0], True),
        right=make_target(ch.feet["right"].position, [0, 0, 0], True))
    x0, z0 = ch.feet["left"].position[0], ch.feet["left"].position[2]
    for k in range(50):
        field.c_acc[:, :] = 0.001 * k
        place_feet(ch, stance, field, t=k / 60)
        assert ch.feet["left"].position[0] == x0
        assert ch.feet["left"].position[2] == z0


def test_release_needs_clearance():
    field = flat_field()
    ch = standing_character()
    foot = ch.feet["left"]
    right = make_target(ch.feet["right"].position, [0, 0, 0], True)

    # swing target still within the release threshold: stays pinned
    barely = make_target([foot.position[0], 0.0005, foot.position[2]],
                         [0, 0.1, 0])
    place_feet(ch, ManualTargets(left=barely, right=right), field, t=0.0)
    assert foot.phase == "contact"

    clear = make_target([foot.position[0], 0.002, foot.position[2]],
                        [0, 0.1, 0])
    place_feet(ch, ManualTargets(left=clear, right=right), field, t=1 / 60)
    assert foot.phase == "swing"
