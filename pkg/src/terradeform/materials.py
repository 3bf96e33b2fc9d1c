"""Terrain material parameters and named presets.

A material bundles the constitutive numbers the deformation model needs:
stiffness (Young's modulus) for compression depth, Poisson's ratio for how
much carved volume reappears as a bump, the characteristic time over which
an impact is absorbed, the loose-layer depth, the display blur width and
the pile-up spread radius.

Preset stiffness values are the midpoints of the published per-material
ranges; override the modulus directly to probe the interval ends.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MaterialParams:
    young_modulus: float        # Pa
    poisson_ratio: float        # dimensionless, 0 (fully compressible) .. 0.5
    char_time: float            # s, absorption time of an impact
    loose_depth: float          # m, deformable depth above the rigid substrate
    blur_sigma_cm: float        # cm, display-only Gaussian width
    contour_radius: float       # m, pile-up spread distance around a footprint


_COMMON = dict(loose_depth=0.30, contour_radius=0.04)

PRESETS: dict[str, MaterialParams] = {
    "snow": MaterialParams(young_modulus=0.375e6, poisson_ratio=0.05,
                           char_time=0.20, blur_sigma_cm=0.5, **_COMMON),
    "dry_sand": MaterialParams(young_modulus=2.25e6, poisson_ratio=0.5,
                               char_time=0.05, blur_sigma_cm=1.0, **_COMMON),
    "mud": MaterialParams(young_modulus=0.625e6, poisson_ratio=0.35,
                          char_time=0.15, blur_sigma_cm=1.0, **_COMMON),
    "soil": MaterialParams(young_modulus=1.25e6, poisson_ratio=0.35,
                           char_time=0.05, blur_sigma_cm=0.5, **_COMMON),
}


def preset(name: str) -> MaterialParams:
    """Return the named material; raises for unknown names."""
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown material preset '{name}' (known: {known})") from None


def validate(params: MaterialParams) -> list[str]:
    """Return every violated range constraint (empty list means valid)."""
    violations = []
    if params.young_modulus <= 0:
        violations.append("young_modulus must be positive")
    if not 0.0 <= params.poisson_ratio <= 0.5:
        violations.append("poisson_ratio out of [0, 0.5]")
    if params.char_time <= 0:
        violations.append("char_time must be positive")
    if params.loose_depth <= 0:
        violations.append("loose_depth must be positive")
    if params.blur_sigma_cm < 0:
        violations.append("blur_sigma_cm must be non-negative")
    if params.contour_radius <= 0:
        violations.append("contour_radius must be positive")
    return violations


def with_overrides(params: MaterialParams, **fields: float) -> MaterialParams:
    """Copy a material with some fields replaced."""
    return replace(params, **fields)
