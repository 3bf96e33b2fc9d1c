"""Per-foot ground force model.

Coordinates: x forward, y up, z lateral; gravity acts along -y.

The force a grounded foot applies to the terrain has two parts: a share of
the body weight, split between the feet by the balance ratio, and a
momentum burst when the foot lands. The landing impulse is the falling
side's share of momentum, frozen at touchdown, and is released as a
constant force J/tau over the material's characteristic time so the burst
magnitude is independent of the engine frame rate: hard ground (small tau)
gives a short, strong burst, soft ground a long, weak one.

The ground reaction force is the exact opposite of the foot force at all
times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GRAVITY = 9.81  # m/s^2, downward along -y

Vec3 = np.ndarray

_ZERO3 = np.zeros(3)


class SupportRatio(NamedTuple):
    """Weight fraction on the right support, plus a degenerate-support flag."""

    value: float
    degenerate: bool


def weight_ratio(p_left: tuple[float, float], p_right: tuple[float, float],
                 p_com: tuple[float, float]) -> SupportRatio:
    """Fraction of body weight on the right foot from the balance posture.

    The ratio is the projection parameter of the center-of-mass ground
    point onto the segment between the two foot ground points, clamped to
    [0, 1]. Coincident feet cannot define a segment; that case returns 0.5
    with the degenerate flag set.
    """
    lx, lz = p_left
    rx, rz = p_right
    dx, dz = rx - lx, rz - lz
    seg2 = dx * dx + dz * dz
    if seg2 < 1e-18:
        return SupportRatio(0.5, True)
    t = ((p_com[0] - lx) * dx + (p_com[1] - lz) * dz) / seg2
    return SupportRatio(min(max(t, 0.0), 1.0), False)


def weight_forces(mass: float, ratio_right: float,
                  grounded_left: bool, grounded_right: bool,
                  g: float = GRAVITY) -> tuple[Vec3, Vec3]:
    """Split the body weight across the grounded feet.

    Both grounded: (1 - r) and r shares. One grounded: it carries the full
    weight. None: both zero. The grounded shares always sum to the full
    weight.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    w = mass * g
    if grounded_left and grounded_right:
        left = np.array([0.0, -(1.0 - ratio_right) * w, 0.0])
        right = np.array([0.0, -ratio_right * w, 0.0])
    elif grounded_left:
        left, right = np.array([0.0, -w, 0.0]), _ZERO3.copy()
    elif grounded_right:
        left, right = _ZERO3.copy(), np.array([0.0, -w, 0.0])
    else:
        left, right = _ZERO3.copy(), _ZERO3.copy()
    return left, right


def impact_impulse(ratio: float, mass: float, v_prev: Vec3) -> Vec3:
    """Landing impulse: the falling side's mass share times the foot
    velocity at the frame preceding the impact."""
    return ratio * mass * np.asarray(v_prev, dtype=np.float64)


@dataclass(frozen=True)
class ImpulseWindow:
    """A landing impulse released over the characteristic time.

    The impulse vector is frozen when the foot touches down and stays fixed
    for the lifetime of the window.
    """

    impulse: np.ndarray  # N*s
    t0: float            # s, contact time
    tau: float           # s, release duration

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("characteristic time must be positive")
        object.__setattr__(self, "impulse",
                           np.asarray(self.impulse, dtype=np.float64))


def momentum_force(window: ImpulseWindow, t: float) -> Vec3:
    """Constant J/tau inside [t0, t0 + tau], zero outside."""
    if window.t0 <= t <= window.t0 + window.tau:
        return window.impulse / window.tau
    return _ZERO3.copy()


def foot_force(weight: Vec3, momentum: Vec3) -> Vec3:
    """Total force the foot applies to the ground."""
    return weight + momentum


def ground_reaction(f_foot: Vec3) -> Vec3:
    """Reaction the terrain applies back on the foot."""
    return -f_foot


def normal_stress(f_foot: Vec3, normal: Vec3, contact_area: float) -> float:
    """Compressive stress: the component of the foot force pressing along
    the inward surface normal, spread evenly over the contact area.

    ``normal`` must be the unit outward (up) normal. Zero contact area is
    the no-contact sentinel and yields zero stress.
    """
    if contact_area < 0:
        raise ValueError("contact area must be non-negative")
    if contact_area == 0.0:
        return 0.0
    pressing = -float(np.dot(f_foot, normal))
    return max(pressing, 0.0) / contact_area


@dataclass(frozen=True)
class FootForces:
    """Per-foot force breakdown for one frame."""

    weight: Vec3
    momentum: Vec3
    grounded: bool
    ratio: float  # this foot's weight share (0 when airborne)

    @property
    def foot(self) -> Vec3:
        return self.weight + self.momentum

    @property
    def ground_reaction(self) -> Vec3:
        return -(self.weight + self.momentum)


@dataclass(frozen=True)
class ForceBreakdown:
    """All per-foot forces for one frame, keyed by foot name."""

    feet: dict[str, FootForces]
    ratio_right: float
    degenerate_support: bool = False

    def total_vertical_reaction(self) -> float:
        return float(sum(f.ground_reaction[1] for f in self.feet.values()))

    def grf_normalized(self, mass: float, g: float = GRAVITY) -> float:
        """Total vertical ground reaction in units of body weight."""
        return self.total_vertical_reaction() / (mass * g)
