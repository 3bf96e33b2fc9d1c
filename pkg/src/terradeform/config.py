"""Scenario configuration: line-oriented ``key = value`` files.

Files use ``[section]`` headers or fully dotted keys; unknown keys are
errors (fail-closed) reported with their line number. An empty file is a
valid configuration: every key has a default describing the standard
walk-on-snow setup (77.5 kg character, 10 x 10 m terrain on a 256^2 grid,
0.30 m loose layer, 0.40 m contact window, 0.04 m pile-up radius, balance
gains 30 / 6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

from . import materials
from .materials import MaterialParams

SCENARIO_KINDS = ("walk", "stand", "sphere_drop", "slope_walk", "gallery")

_MATERIAL_FIELDS = ("young_modulus", "poisson_ratio", "char_time",
                    "loose_depth", "blur_sigma_cm", "contour_radius")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# full key -> (parser, default); None default means "unset"
SCHEMA: dict[str, tuple] = {
    "scenario.kind": (str, "walk"),
    "scenario.duration": (float, 10.0),
    "scenario.dt": (float, 1.0 / 60.0),
    "scenario.start_x": (float, 2.0),
    "terrain.width": (float, 10.0),
    "terrain.depth": (float, 10.0),
    "terrain.nx": (int, 256),
    "terrain.nz": (int, 256),
    "terrain.base": (str, "flat"),
    "terrain.base_height": (float, 0.0),
    "terrain.ramp_slope": (float, 0.0),
    "terrain.window_side": (float, 0.40),
    "material.preset": (str, "snow"),
    "material.young_modulus": (float, None),
    "material.poisson_ratio": (float, None),
    "material.char_time": (float, None),
    "material.loose_depth": (float, None),
    "material.blur_sigma_cm": (float, None),
    "material.contour_radius": (float, None),
    "character.mass": (float, 77.5),
    "character.height": (float, 1.8),
    "character.capsule_radius": (float, 0.25),
    "character.gain_kp": (float, 30.0),
    "character.gain_kd": (float, 6.0),
    "character.foot_size": (float, 0.10),
    "gait.speed": (float, 1.65),
    "gait.step_period": (float, 0.8),
    "gait.duty_factor": (float, 0.6),
    "gait.swing_lift": (float, 0.06),
    "gait.contact_speed": (float, 0.9),
    "gait.stance_width": (float, 0.18),
    "sphere.mass": (float, 50.0),
    "sphere.radius": (float, 0.25),
    "sphere.drop_height": (float, 2.5),
    "output.heightmap_every": (int, 0),
    "output.forces": (_bool, True),
    "output.footprints": (_bool, True),
}


@dataclass
class ScenarioConfig:
    """Resolved configuration: `values` maps dotted keys to typed values;
    `explicit` records which keys the user actually set."""

    values: dict = dataclass_field(default_factory=dict)
    explicit: set = dataclass_field(default_factory=set)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def kind(self) -> str:
        return self.values["scenario.kind"]

    def set(self, key: str, raw: str, where: str = "--set") -> None:
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key '{key}'")
        parser, _ = SCHEMA[key]
        try:
            self.values[key] = parser(raw.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: bad value for '{key}': {exc}") from None
        self.explicit.add(key)

    def material(self) -> MaterialParams:
        """Material from the preset plus any explicit field overrides."""
        mat = materials.preset(self.values["material.preset"])
        overrides = {}
        for name in _MATERIAL_FIELDS:
            value = self.values[f"material.{name}"]
            if value is not None:
                overrides[name] = value
        if overrides:
            mat = materials.with_overrides(mat, **overrides)
        violations = materials.validate(mat)
        if violations:
            raise ConfigError("material: " + "; ".join(violations))
        return mat

    def material_explicit(self) -> bool:
        return any(key.startswith("material.") for key in self.explicit)

    def base_fn(self):
        """Terrain base profile as a height function of (x, z)."""
        kind = self.values["terrain.base"]
        h0 = self.values["terrain.base_height"]
        if kind == "flat":
            return lambda x, z: h0
        if kind == "ramp":
            slope = self.values["terrain.ramp_slope"]
            return lambda x, z: h0 + slope * x
        raise ConfigError(f"terrain.base: unknown profile '{kind}'")

    def validate(self) -> None:
        v = self.values
        if v["scenario.kind"] not in SCENARIO_KINDS:
            raise ConfigError(
                f"scenario.kind must be one of {', '.join(SCENARIO_KINDS)}")
        if v["scenario.duration"] <= 0:
            raise ConfigError("scenario.duration must be positive")
        if v["scenario.dt"] <= 0:
            raise ConfigError("scenario.dt must be positive")
        if v["terrain.width"] <= 0 or v["terrain.depth"] <= 0:
            raise ConfigError("terrain dimensions must be positive")
        if v["terrain.nx"] < 2 or v["terrain.nz"] < 2:
            raise ConfigError("terrain grid must be at least 2x2")
        if v["terrain.window_side"] <= 0:
            raise ConfigError("terrain.window_side must be positive")
        if v["character.mass"] <= 0:
            raise ConfigError("character.mass must be positive")
        if v["character.foot_size"] <= 0:
            raise ConfigError("character.foot_size must be positive")
        if not 0.5 < v["gait.duty_factor"] < 1.0:
            raise ConfigError("gait.duty_factor must lie in (0.5, 1)")
        if v["gait.speed"] < 0:
            raise ConfigError("gait.speed must be non-negative")
        if v["sphere.mass"] <= 0 or v["sphere.radius"] <= 0:
            raise ConfigError("sphere mass and radius must be positive")
        if v["sphere.drop_height"] <= 0:
            raise ConfigError("sphere.drop_height must be positive")
        nu = v["material.poisson_ratio"]
        if nu is not None and not 0.0 <= nu <= 0.5:
            raise ConfigError("material.poisson_ratio out of [0, 0.5]")
        self.material()  # surfaces remaining material violations

    def clone(self) -> "ScenarioConfig":
        return ScenarioConfig(dict(self.values), set(self.explicit))


def default_config() -> ScenarioConfig:
    return ScenarioConfig({key: default for key, (_, default) in SCHEMA.items()},
                          set())


def parse_config(text: str) -> ScenarioConfig:
    """Parse a config file body; unknown keys and bad values are errors
    carrying the offending line number."""
    cfg = default_config()
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if "." not in key:
            if not section:
                raise ConfigError(
                    f"line {lineno}: key '{key}' outside any [section]")
            key = f"{section}.{key}"
        cfg.set(key, value, where=f"line {lineno}")
    cfg.validate()
    return cfg


def parse_config_file(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply ``key=value`` strings (from --set) on top of a parsed config."""
    out = cfg.clone()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got '{item}'")
        key, _, value = item.partition("=")
        out.set(key.strip(), value)
    out.validate()
    return out


def grf_walk_material() -> MaterialParams:
    """Relatively hard validation terrain for ground-reaction-force traces."""
    return MaterialParams(young_modulus=2.0e6, poisson_ratio=0.35,
                          char_time=0.05, loose_depth=0.30,
                          blur_sigma_cm=0.5, contour_radius=0.04)


def sphere_default_material() -> MaterialParams:
    """Purely compressible drop-test terrain."""
    return MaterialParams(young_modulus=1.0e6, poisson_ratio=0.0,
                          char_time=0.20, loose_depth=0.30,
                          blur_sigma_cm=0.5, contour_radius=0.04)


def impact_speed(drop_height: float, g: float = 9.81) -> float:
    """Free-fall speed after the given drop."""
    return math.sqrt(2.0 * g * drop_height)
