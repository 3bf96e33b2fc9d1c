"""Walking character: capsule body, balance controller, gait generation.

The character is layered. A kinematic gait generator produces per-frame
foot and center-of-mass targets; foot pinning enforces ground contact and
feeds terrain deformation back into the pose (a pinned foot keeps its
horizontal position to machine precision while its height rides the
sinking surface, and the root follows the stance feet down); on top, a
single rigid capsule carries a one-degree-of-freedom tilt in the sagittal
plane driven by a proportional-derivative balance law.

Conventions: x is the walk direction, y is up, z is lateral. The tilt
angle is positive when the capsule leans forward (+x). The control law's
angular-velocity input is measured about the gravity-cross-velocity
normal, which is the opposite orientation, so the swing term damps the
tilt; the capsule's ground point leans by (hip height) * sin(tilt).

The gait is a constant-speed cycle: feet land on alternating lateral
lanes, each aimed at the character's ground point at touchdown time, with
a swing arc that rises smoothly to a fixed apex and ends in a straight
constant-speed drop so the touchdown speed is exactly the configured
contact speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .contact import SEAT_EPSILON, FootCollider
from .heightfield import Heightfield

LEFT = "left"
RIGHT = "right"
FEET = (LEFT, RIGHT)

# fraction of the descent spent easing from zero to full drop speed
_DESCENT_EASE = 0.5
# fraction of the swing by which the horizontal travel is complete
_HORIZONTAL_DONE = 0.8
# liftoff clearance that avoids contact chattering on compressing ground
RELEASE_THRESHOLD = 1e-3
# how strongly tilt deviations from the settled lean shift step placement;
# a full-arm (1.0) coupling would cancel the balance controller's restoring
# geometry and let the lean drift without bound
PLACEMENT_TILT_GAIN = 0.3


def surface_at_clamped(terrain: Heightfield, x: float, z: float) -> float:
    """Surface height with the query point clamped into the terrain extent.

    Gait reference points (old lift points, landing aims) can fall slightly
    outside a finite terrain; the nearest edge height is the sane reading
    for them. Contact math keeps the strict in-extent queries.
    """
    cx = min(max(x, 0.0), terrain.width_m)
    cz = min(max(z, 0.0), terrain.depth_m)
    return terrain.surface_height_at(cx, cz)


def capsule_transverse_inertia(mass: float, height: float, radius: float) -> float:
    """Moment of inertia of a solid capsule about a transverse axis through
    its centroid (cylinder plus two hemispherical caps)."""
    cyl_len = height - 2.0 * radius
    if cyl_len <= 0:
        raise ValueError("height must exceed the capsule diameter")
    v_cyl = math.pi * radius ** 2 * cyl_len
    v_sph = 4.0 / 3.0 * math.pi * radius ** 3
    rho = mass / (v_cyl + v_sph)
    m_cyl = rho * v_cyl
    m_hemi = rho * v_sph / 2.0
    i_cyl = m_cyl * (cyl_len ** 2 / 12.0 + radius ** 2 / 4.0)
    # hemisphere about its own center of mass, then shifted to the centroid
    i_hemi_cm = (83.0 / 320.0) * m_hemi * radius ** 2
    d = cyl_len / 2.0 + 3.0 * radius / 8.0
    return i_cyl + 2.0 * (i_hemi_cm + m_hemi * d * d)


@dataclass(frozen=True)
class GaitParams:
    """Parametric walking cycle.

    ``step_length`` is the stride advanced per full cycle and
    ``step_period`` the cycle duration, so ``forward_speed`` must equal
    their ratio. ``contact_speed`` is the foot speed one frame before
    touchdown (the descent ends in a straight drop at exactly this speed).
    """

    forward_speed: float     # m/s
    step_length: float       # m per full cycle
    step_period: float       # s per full cycle
    duty_factor: float       # stance fraction of the cycle, in (0.5, 1)
    swing_lift: float        # m, swing apex above the landing surface
    contact_speed: float     # m/s, downward speed at touchdown
    stance_width: float = 0.18  # m, lateral distance between foot lanes

    def __post_init__(self):
        if not 0.5 < self.duty_factor < 1.0:
            raise ValueError("duty_factor must lie in (0.5, 1) for walking")
        if self.step_period <= 0:
            raise ValueError("step_period must be positive")
        if abs(self.forward_speed - self.step_length / self.step_period) \
                > 1e-9 * max(1.0, abs(self.forward_speed)):
            raise ValueError("forward_speed must equal step_length/step_period")
        if self.swing_lift < 0 or self.contact_speed < 0 or self.stance_width < 0:
            raise ValueError("gait lengths and speeds must be non-negative")

    @staticmethod
    def from_speed(speed: float, step_period: float = 0.8,
                   duty_factor: float = 0.6, swing_lift: float = 0.06,
                   contact_speed: float = 0.9,
                   stance_width: float = 0.18) -> "GaitParams":
        return GaitParams(forward_speed=speed, step_length=speed * step_period,
                          step_period=step_period, duty_factor=duty_factor,
                          swing_lift=swing_lift, contact_speed=contact_speed,
                          stance_width=stance_width)

    @property
    def standing(self) -> bool:
        return self.forward_speed == 0.0


@dataclass
class FootState:
    name: str
    phase: str = "swing"                       # "swing" | "contact"
    position: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(3))
    contact_time: float | None = None
    pin_point: np.ndarray | None = None        # fixed (x, z) + live surface y

    @property
    def grounded(self) -> bool:
        return self.phase == "contact"


@dataclass
class CharacterState:
    mass: float
    height: float
    capsule_radius: float
    gain_kp: float
    gain_kd: float
    foot_size: float                 # side of the square foot box, m
    root: np.ndarray                 # capsule root (hips) position
    tilt: float = 0.0                # rad, forward-positive sagittal lean
    tilt_rate: float = 0.0           # rad/s
    inertia: float = 0.0             # kg m^2 about the swing axis
    velocity: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(3))
    feet: dict[str, FootState] = dataclass_field(default_factory=dict)
    root_offset: float = 0.0         # hip height above the stance feet, m

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not self.inertia:
            self.inertia = capsule_transverse_inertia(
                self.mass, self.height, self.capsule_radius)
        if not self.root_offset:
            self.root_offset = 0.53 * self.height
        if not self.feet:
            self.feet = {name: FootState(name) for name in FEET}

    @property
    def com(self) -> np.ndarray:
        """Center of mass, tracked at the capsule centroid (the root)."""
        return self.root.copy()

    def com_ground_point(self) -> tuple[float, float]:
        """Plain gravity projection of the center of mass onto the ground;
        this is the balance point the weight split uses."""
        return (float(self.root[0]), float(self.root[2]))

    def com_support_point(self) -> tuple[float, float]:
        """Ground point of the center of mass seen as a pendulum pivoting
        about the support: the sagittal lean swings it by the hip height.
        The balance controller steers this point over the support midpoint."""
        return (self.root[0] + self.root_offset * math.sin(self.tilt),
                self.root[2])

    def foot_collider(self, name: str) -> FootCollider:
        f = self.feet[name]
        half = self.foot_size / 2.0
        half_h = 0.02
        return FootCollider(center=(f.position[0], f.position[1] + half_h,
                                    f.position[2]),
                            half_extents=(half, half_h, half))


def pd_torque(displacement_along_slope: float, angular_velocity: float,
              gain_kp: float, gain_kd: float) -> float:
    """Balance control law: gain_kp * displacement + gain_kd * angular rate.

    ``displacement_along_slope`` is the slope-direction distance from the
    center-of-mass ground point to the middle of the support segment;
    ``angular_velocity`` is measured about the gravity-cross-velocity
    normal.
    """
    return gain_kp * displacement_along_slope + gain_kd * angular_velocity


def slope_unit_vector(terrain: Heightfield, x: float, z: float) -> np.ndarray:
    """Unit vector along the terrain slope at (x, z), oriented forward (+x).

    On flat ground this degenerates to the forward direction itself.
    """
    dhdx, dhdz = terrain.surface_gradient_at(x, z)
    normal = np.array([-dhdx, 1.0, -dhdz])
    normal /= np.linalg.norm(normal)
    forward = np.array([1.0, 0.0, 0.0])
    tangent = forward - np.dot(forward, normal) * normal
    norm = np.linalg.norm(tangent)
    if norm < 1e-12:
        return forward
    return tangent / norm


def controller_torque(state: CharacterState, terrain: Heightfield,
                      gain_kp: float, gain_kd: float) -> float:
    """Tilt/swing torque steering the center of mass over the support.

    The target ground point is the middle of the segment between the feet
    projected onto the terrain surface. The displacement is measured along
    the slope direction; the swing rate enters measured about the
    gravity-cross-velocity normal (opposite the forward-tilt direction),
    so positive displacement rotates the capsule toward the target and the
    swing term opposes the motion.
    """
    points = []
    for name in FEET:
        f = state.feet[name]
        px, pz = float(f.position[0]), float(f.position[2])
        points.append(np.array([px, surface_at_clamped(terrain, px, pz), pz]))
    p_target = 0.5 * (points[0] + points[1])
    cx, cz = state.com_support_point()
    p_com = np.array([cx, surface_at_clamped(terrain, cx, cz), cz])
    u = slope_unit_vector(terrain, cx, cz)
    displacement = float(np.dot(p_target - p_com, u))
    return pd_torque(displacement, -state.tilt_rate, gain_kp, gain_kd)


def step_rigid_body(state: CharacterState, torque: float, dt: float) -> CharacterState:
    """Semi-implicit Euler update of the capsule: rate first, then angle,
    and the root translated by the gait's commanded velocity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    state.tilt_rate += (torque / state.inertia) * dt
    state.tilt += state.tilt_rate * dt
    state.root = state.root + state.velocity * dt
    return state


@dataclass(frozen=True)
class FootTarget:
    position: np.ndarray
    velocity: np.ndarray
    wants_contact: bool


@dataclass(frozen=True)
class GaitFrame:
    """Kinematic targets for one frame."""

    feet: dict[str, FootTarget]
    com_xz: tuple[float, float]


class GaitPlanner:
    """Stateful generator of per-frame gait targets.

    The reference ground point advances at constant speed; the left foot
    strikes at cycle phase 0 and the right at 0.5. Landings aim at the
    ground point (including the tilt lean) at the predicted touchdown
    time, so the steady-state balance split at each strike is fixed by the
    stride and stance-width geometry. Plant points are updated from the
    actual pin positions reported back by foot placement.
    """

    def __init__(self, params: GaitParams, terrain: Heightfield,
                 start_xz: tuple[float, float], root_offset: float,
                 start_phase: float = 0.25):
        self.params = params
        self.terrain = terrain
        self.x0 = float(start_xz[0])
        self.z0 = float(start_xz[1])
        self.root_offset = root_offset
        self.start_phase = start_phase
        self.lanes = {LEFT: self.z0 + params.stance_width / 2.0,
                      RIGHT: self.z0 - params.stance_width / 2.0}
        self.strike_phase = {LEFT: 0.0, RIGHT: 0.5}
        self.tilt_ref = 0.0  # settled lean; placements shift relative to it
        self.plant: dict[str, np.ndarray] = {}
        self.plant_time: dict[str, float] = {}
        self.lift_from: dict[str, np.ndarray] = {}
        self._init_steady_state()

    # -- initialization ----------------------------------------------------

    def _init_steady_state(self):
        p = self.params
        if p.standing:
            for name in FEET:
                pos = np.array([self.x0, self.lanes[name]])
                self.plant[name] = pos
                self.plant_time[name] = 0.0
                self.lift_from[name] = pos
            return
        for name in FEET:
            # time of this foot's most recent strike relative to t = 0
            rel = (self.start_phase - self.strike_phase[name]) % 1.0
            t_strike = -rel * p.step_period
            x = self._com_x(t_strike)
            self.plant[name] = np.array([x, self.lanes[name]])
            self.plant_time[name] = t_strike
            # the previous plant, in case the foot starts mid-swing
            self.lift_from[name] = np.array([x - p.step_length, self.lanes[name]])

    # -- kinematic reference -----------------------------------------------

    def _com_x(self, t: float) -> float:
        return self.x0 + self.params.forward_speed * t

    def phase_at(self, t: float) -> float:
        if self.params.standing:
            return 0.0
        return (self.start_phase + t / self.params.step_period) % 1.0

    def com_xz(self, t: float) -> tuple[float, float]:
        return (self._com_x(t), self.z0)

    # -- events from foot placement -----------------------------------------

    def notify_contact(self, foot: str, pin_xz: tuple[float, float],
                       t: float) -> None:
        self.plant[foot] = np.array([pin_xz[0], pin_xz[1]])
        self.plant_time[foot] = t

    def notify_liftoff(self, foot: str, from_xz: tuple[float, float]) -> None:
        self.lift_from[foot] = np.array([from_xz[0], from_xz[1]])

    # -- target generation ---------------------------------------------------

    def targets(self, t: float, tilt: float = 0.0) -> GaitFrame:
        p = self.params
        feet: dict[str, FootTarget] = {}
        if p.standing:
            for name in FEET:
                px, pz = self.plant[name]
                y = surface_at_clamped(self.terrain, px, pz)
                feet[name] = FootTarget(np.array([px, y, pz]), np.zeros(3), True)
            return GaitFrame(feet, self.com_xz(t))

        phase = self.phase_at(t)
        for name in FEET:
            local = (phase - self.strike_phase[name]) % 1.0
            if local < p.duty_factor:
                window_start = t - local * p.step_period
                swing_len = (1.0 - p.duty_factor) * p.step_period
                if self.plant_time[name] > window_start - swing_len - 1e-9:
                    px, pz = self.plant[name]
                else:
                    # the foot has not touched down yet this stance window;
                    # keep aiming until the actual pin is reported back
                    px, pz = self._landing_aim(name, t, 1.0, tilt)
                y = surface_at_clamped(self.terrain, px, pz)
                feet[name] = FootTarget(np.array([px, y, pz]), np.zeros(3), True)
            else:
                s = (local - p.duty_factor) / (1.0 - p.duty_factor)
                feet[name] = self._swing_target(name, s, t, tilt)
        return GaitFrame(feet, self.com_xz(t))

    def _landing_aim(self, foot: str, t: float, s: float, tilt: float) -> np.ndarray:
        """Aim point: the balance ground point at the predicted touchdown
        time, shifted by the tilt's deviation from the settled lean."""
        p = self.params
        t_land = t + (1.0 - s) * (1.0 - p.duty_factor) * p.step_period
        shift = (PLACEMENT_TILT_GAIN * self.root_offset
                 * (math.sin(tilt) - math.sin(self.tilt_ref)))
        return np.array([self._com_x(t_land) + shift, self.lanes[foot]])

    def _swing_target(self, foot: str, s: float, t: float, tilt: float) -> FootTarget:
        """Swing pose: the foot height is the terrain surface under the foot
        plus a lift bump, so the arc clears carved holes and steps; the bump
        peaks at the configured lift and ends in a straight drop at exactly
        the contact speed."""
        p = self.params
        t_swing = (1.0 - p.duty_factor) * p.step_period
        aim = self._landing_aim(foot, t, s, tilt)
        lift = self.lift_from[foot]

        # horizontal: smooth travel completed by _HORIZONTAL_DONE of the swing
        sigma = min(s / _HORIZONTAL_DONE, 1.0)
        adv = sigma - math.sin(2.0 * math.pi * sigma) / (2.0 * math.pi)
        x = lift[0] + (aim[0] - lift[0]) * adv
        if sigma < 1.0:
            dadv = (1.0 - math.cos(2.0 * math.pi * sigma)) / (_HORIZONTAL_DONE * t_swing)
            vx = (aim[0] - lift[0]) * dadv
        else:
            vx = 0.0

        lane = self.lanes[foot]
        bump, dbump = self._lift_bump(s, t_swing)
        ground = surface_at_clamped(self.terrain, x, lane)
        dgdx, _ = self.terrain.surface_gradient_at(
            min(max(x, 0.0), self.terrain.width_m),
            min(max(lane, 0.0), self.terrain.depth_m))
        pos = np.array([x, ground + bump, lane])
        vel = np.array([vx, dbump + dgdx * vx, 0.0])
        return FootTarget(pos, vel, False)

    def _descent_time(self, t_swing: float) -> float:
        p = self.params
        if p.contact_speed <= 0:
            return 0.25 * t_swing
        t_d = p.swing_lift / (p.contact_speed * (1.0 - _DESCENT_EASE / 2.0))
        return min(t_d, 0.6 * t_swing)

    def _lift_bump(self, s: float, t_swing: float) -> tuple[float, float]:
        """Ground-relative lift profile over the swing: eased rise to the
        apex, then an eased drop ending in a straight segment at exactly
        the contact speed (zero at both ends)."""
        p = self.params
        t_d = self._descent_time(t_swing)
        t_rise = t_swing - t_d
        ts = s * t_swing
        if ts <= t_rise:
            r = ts / t_rise if t_rise > 0 else 1.0
            bump = p.swing_lift * math.sin(math.pi * r / 2.0) ** 2
            dbump = (p.swing_lift * math.pi / (2.0 * t_rise)
                     * math.sin(math.pi * r)) if t_rise > 0 else 0.0
            return bump, dbump
        td = ts - t_rise
        t_ease = _DESCENT_EASE * t_d
        v_c = p.swing_lift / (t_d * (1.0 - _DESCENT_EASE / 2.0)) if t_d > 0 else 0.0
        if td <= t_ease:
            drop = v_c * td * td / (2.0 * t_ease) if t_ease > 0 else 0.0
            vy = -v_c * td / t_ease if t_ease > 0 else -v_c
        else:
            drop = v_c * t_ease / 2.0 + v_c * (td - t_ease)
            vy = -v_c
        return p.swing_lift - drop, vy


def gait_targets(params: GaitParams, cycle_phase: float,
                 terrain: Heightfield,
                 start_xz: tuple[float, float] = (0.0, 0.0),
                 root_offset: float = 0.954) -> GaitFrame:
    """Nominal steady-state gait targets at a cycle phase (no tilt lean).

    Pure preview of the walking cycle: the left foot strikes at phase 0,
    the right at 0.5, and the reference ground point advances uniformly.
    """
    if not 0.0 <= cycle_phase < 1.0:
        raise ValueError("cycle phase must lie in [0, 1)")
    planner = GaitPlanner(params, terrain, start_xz, root_offset,
                          start_phase=cycle_phase)
    return planner.targets(0.0, tilt=0.0)


@dataclass(frozen=True)
class ContactEvent:
    foot: str
    t0: float
    pin: np.ndarray       # 3D pin point at touchdown
    v_prev: np.ndarray    # foot velocity one frame before impact


def place_feet(state: CharacterState, frame_targets: GaitFrame,
               terrain: Heightfield, t: float,
               release_threshold: float = RELEASE_THRESHOLD,
               planner: GaitPlanner | None = None) -> list[ContactEvent]:
    """Apply gait targets to the feet, enforcing ground contact.

    A swing foot whose target penetrates the current surface transitions
    to contact and emits an event carrying the previous frame's velocity.
    A pinned foot keeps its horizontal position and rides the (possibly
    sinking) surface; it releases once its swing target clears the surface
    by the release threshold. The root height follows the stance feet, so
    ground compression lowers the whole gait.
    """
    events: list[ContactEvent] = []
    for name, foot in state.feet.items():
        tgt = frame_targets.feet[name]
        if foot.phase == "swing":
            tx, ty, tz = tgt.position
            surface = surface_at_clamped(terrain, tx, tz)
            if ty <= surface + SEAT_EPSILON:
                pin = np.array([tx, surface, tz])
                events.append(ContactEvent(name, t, pin, foot.velocity.copy()))
                foot.phase = "contact"
                foot.contact_time = t
                foot.pin_point = pin
                foot.position = pin.copy()
                foot.velocity = np.zeros(3)
                if planner is not None:
                    planner.notify_contact(name, (tx, tz), t)
            else:
                foot.position = tgt.position.copy()
                foot.velocity = tgt.velocity.copy()
        else:
            px, pz = foot.pin_point[0], foot.pin_point[2]
            surface = surface_at_clamped(terrain, px, pz)
            if (not tgt.wants_contact
                    and tgt.position[1] > surface + release_threshold):
                foot.phase = "swing"
                foot.contact_time = None
                foot.pin_point = None
                foot.position = tgt.position.copy()
                foot.velocity = tgt.velocity.copy()
                if planner is not None:
                    planner.notify_liftoff(name, (px, pz))
            else:
                foot.pin_point = np.array([px, surface, pz])
                foot.position = foot.pin_point.copy()
                foot.velocity = np.zeros(3)

    grounded = [f for f in state.feet.values() if f.grounded]
    if grounded:
        mean_y = sum(float(f.position[1]) for f in grounded) / len(grounded)
        state.root[1] = mean_y + state.root_offset
    return events
