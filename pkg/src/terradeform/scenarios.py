"""Canned experiment runners and file emitters.

Every scenario writes plain-text, locale-independent outputs into its run
directory so identical configurations reproduce byte-identical files:

  forces.csv       two rows per frame (one per foot), 9-significant-digit
                   decimal numbers
  footprints.csv   one row per completed footprint job
  heightmap_*.pgm  display-height snapshots (see heightfield.to_pgm)
  *_summary.csv    scenario-specific aggregates

The sphere-drop scenario drives the same contact and deformation machinery
as walking feet: the sphere is a single "foot" pinned at a cell center,
with rays cast against the sphere inside a fixed window.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .character import CharacterState, GaitParams, GaitPlanner
from .config import (ScenarioConfig, grf_walk_material, impact_speed,
                     sphere_default_material)
from .contact import SphereCollider, contact_window
from .deformation import FootprintJob
from .forces import (GRAVITY, ForceBreakdown, ImpulseWindow, momentum_force)
from .heightfield import Heightfield, new_heightfield, to_pgm
from .materials import PRESETS, MaterialParams
from .simulation import (FootprintSummary, OutputSinks, RunReport, Simulation)

FORCES_HEADER = "t,foot,phase,wr,Fw_x,Fw_y,Fw_z,Fm_x,Fm_y,Fm_z,Ff_x,Ff_y,Ff_z,grf_norm"
FOOTPRINTS_HEADER = "foot,t0,mean_depth,carved_volume,bump_volume"

GALLERY_ORDER = ("snow", "dry_sand", "mud", "soil")


def fmt(x: float) -> str:
    """Locale-independent 9-significant-digit decimal formatting."""
    return f"{x:.9g}"


def forces_row(t: float, foot: str, phase: str, forces, grf_norm: float) -> str:
    w, m = forces.weight, forces.momentum
    f = forces.foot
    cols = [fmt(t), foot, phase, fmt(forces.ratio),
            fmt(w[0]), fmt(w[1]), fmt(w[2]),
            fmt(m[0]), fmt(m[1]), fmt(m[2]),
            fmt(f[0]), fmt(f[1]), fmt(f[2]),
            fmt(grf_norm)]
    return ",".join(cols)


class FileSinks(OutputSinks):
    """Streams scenario outputs into a run directory."""

    def __init__(self, out_dir: Path, mass: float, blur_sigma_cm: float,
                 heightmap_every: int = 0, write_forces: bool = True,
                 write_footprints: bool = True):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.mass = mass
        self.blur_sigma_cm = blur_sigma_cm
        self.heightmap_every = heightmap_every
        self._forces = None
        self._footprints = None
        if write_forces:
            self._forces = open(self.out_dir / "forces.csv", "w",
                                encoding="utf-8", newline="\n")
            self._forces.write(FORCES_HEADER + "\n")
        if write_footprints:
            self._footprints = open(self.out_dir / "footprints.csv", "w",
                                    encoding="utf-8", newline="\n")
            self._footprints.write(FOOTPRINTS_HEADER + "\n")

    def on_frame(self, sim: Simulation, breakdown: ForceBreakdown) -> None:
        frame = sim.frame - 1  # step() already advanced the counter
        t = frame * sim.dt
        if self._forces is not None:
            grf = breakdown.grf_normalized(self.mass)
            for foot in ("left", "right"):
                phase = sim.character.feet[foot].phase
                self._forces.write(
                    forces_row(t, foot, phase, breakdown.feet[foot], grf) + "\n")
        if self.heightmap_every > 0 and frame % self.heightmap_every == 0:
            self._write_heightmap(sim.field, f"heightmap_{frame:06d}.pgm")

    def on_job_complete(self, sim: Simulation, s: FootprintSummary) -> None:
        if self._footprints is not None:
            self._footprints.write(",".join([
                s.foot, fmt(s.t0), fmt(s.mean_depth),
                fmt(s.carved_volume), fmt(s.bump_volume)]) + "\n")

    def on_finish(self, sim: Simulation, report: RunReport) -> None:
        self._write_heightmap(sim.field, "heightmap_final.pgm")
        self.close()

    def _write_heightmap(self, field: Heightfield, name: str) -> None:
        grid = field.display_height(self.blur_sigma_cm)
        path = self.out_dir / name
        try:
            path.write_text(to_pgm(grid), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"writing heightmap {path}: {exc}") from exc

    def close(self) -> None:
        for fh in (self._forces, self._footprints):
            if fh is not None:
                fh.close()
        self._forces = None
        self._footprints = None


# -- builders ---------------------------------------------------------------


def build_terrain(cfg: ScenarioConfig) -> Heightfield:
    return new_heightfield(cfg["terrain.width"], cfg["terrain.depth"],
                           cfg["terrain.nx"], cfg["terrain.nz"], cfg.base_fn())


def build_gait(cfg: ScenarioConfig, speed: float | None = None) -> GaitParams:
    if speed is None:
        speed = cfg["gait.speed"]
    return GaitParams.from_speed(
        speed, step_period=cfg["gait.step_period"],
        duty_factor=cfg["gait.duty_factor"], swing_lift=cfg["gait.swing_lift"],
        contact_speed=cfg["gait.contact_speed"],
        stance_width=cfg["gait.stance_width"])


def make_simulation(cfg: ScenarioConfig, material: MaterialParams | None = None,
                    speed: float | None = None) -> Simulation:
    """Assemble terrain, character and planner from a configuration."""
    field = build_terrain(cfg)
    mat = material if material is not None else cfg.material()
    gait = build_gait(cfg, speed)
    x0 = cfg["scenario.start_x"]
    z0 = cfg["terrain.depth"] / 2.0
    character = CharacterState(
        mass=cfg["character.mass"], height=cfg["character.height"],
        capsule_radius=cfg["character.capsule_radius"],
        gain_kp=cfg["character.gain_kp"], gain_kd=cfg["character.gain_kd"],
        foot_size=cfg["character.foot_size"],
        root=np.array([x0, 0.0, z0]),
        velocity=np.array([gait.forward_speed, 0.0, 0.0]))
    planner = GaitPlanner(gait, field, (x0, z0), character.root_offset)
    sim = Simulation(field, mat, character, planner,
                     dt=cfg["scenario.dt"], window_side=cfg["terrain.window_side"])
    _seed_equilibrium_tilt(sim)
    return sim


def _seed_equilibrium_tilt(sim: Simulation) -> None:
    """Start the tilt at the settled-lean estimate to shorten the
    controller transient.

    Walking keeps the support midpoint behind the body's ground point: over
    a steady cycle the two feet average about 0.26 strides behind it (the
    stance foot drifts back under the body, the swing foot catches up), so
    the balance controller settles on a small backward lean. The planner's
    placement coupling is anchored to the same reference.
    """
    ch = sim.character
    planner = sim.planner
    if planner.params.standing:
        return
    mean_offset = -0.26 * planner.params.step_length
    lean = mean_offset / ch.root_offset
    ch.tilt = math.asin(min(max(lean, -0.95), 0.95))
    planner.tilt_ref = ch.tilt


def _file_sinks(cfg: ScenarioConfig, out_dir: Path | str,
                mat: MaterialParams) -> FileSinks:
    return FileSinks(Path(out_dir), mass=cfg["character.mass"],
                     blur_sigma_cm=mat.blur_sigma_cm,
                     heightmap_every=cfg["output.heightmap_every"],
                     write_forces=cfg["output.forces"],
                     write_footprints=cfg["output.footprints"])


# -- scenario runners ---------------------------------------------------------


def run_walk(cfg: ScenarioConfig, out_dir: Path | str,
             material: MaterialParams | None = None,
             speed: float | None = None) -> RunReport:
    """Generic walking run with per-frame force rows and heightmaps."""
    mat = material if material is not None else cfg.material()
    sim = make_simulation(cfg, material=mat, speed=speed)
    sinks = _file_sinks(cfg, out_dir, mat)
    try:
        return sim.run(cfg["scenario.duration"], sinks)
    finally:
        sinks.close()


def run_walk_grf(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Walk on the hard validation terrain used for the force traces.

    Unless the configuration sets material keys explicitly, the ground is
    relatively stiff with a short absorption time so the momentum burst at
    every heel-strike stands out in the logged ground reaction forces.
    """
    mat = cfg.material() if cfg.material_explicit() else grf_walk_material()
    return run_walk(cfg, out_dir, material=mat)


def run_stand(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Static double-support stand; the terrain still creeps to the static
    compression target."""
    return run_walk(cfg, out_dir, speed=0.0)


def run_slope_walk(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Walk up a ramp (15 degrees unless the config overrides the slope)."""
    c = cfg.clone()
    if "terrain.base" not in cfg.explicit:
        c.values["terrain.base"] = "ramp"
    if "terrain.ramp_slope" not in cfg.explicit:
        c.values["terrain.ramp_slope"] = math.tan(math.radians(15.0))
    return run_walk(c, out_dir)


class _SphereBody:
    """Sphere resting on its pin cell; the bottom rides the carved surface."""

    def __init__(self, field: Heightfield, i0: int, j0: int,
                 radius: float, pin_x: float, pin_z: float):
        self.field = field
        self.i0 = i0
        self.j0 = j0
        self.radius = radius
        self.pin_x = pin_x
        self.pin_z = pin_z

    def bottom(self) -> float:
        f = self.field
        return float(f.base_height[self.i0, self.j0] - f.c_acc[self.i0, self.j0]
                     + f.h_acc[self.i0, self.j0])

    def collider(self) -> SphereCollider:
        return SphereCollider(center=(self.pin_x, self.bottom() + self.radius,
                                      self.pin_z), radius=self.radius)


def run_sphere_drop(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Drop a sphere onto the terrain and carve its crater.

    The impact speed comes from the drop height; the impulse is the full
    sphere momentum released over the characteristic time, on top of the
    static weight. The drop point snaps to the nearest cell center so the
    surface height under the sphere is an exact cell value. Runs until the
    footprint job completes (or the configured duration caps it).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mat = cfg.material() if cfg.material_explicit() else sphere_default_material()
    field = build_terrain(cfg)
    mass = cfg["sphere.mass"]
    radius = cfg["sphere.radius"]
    drop = cfg["sphere.drop_height"]
    dt = cfg["scenario.dt"]
    v = impact_speed(drop)

    cs = field.cell_size
    i0 = min(max(int(round(cfg["terrain.width"] / 2.0 / cs - 0.5)), 0), field.nx - 1)
    j0 = min(max(int(round(cfg["terrain.depth"] / 2.0 / cs - 0.5)), 0), field.nz - 1)
    pin_x = (i0 + 0.5) * cs
    pin_z = (j0 + 0.5) * cs

    window_side = max(cfg["terrain.window_side"], 2.0 * radius + 4.0 * cs)
    cells = contact_window((pin_x, pin_z), window_side, field)
    impulse = ImpulseWindow(np.array([0.0, -mass * v, 0.0]), 0.0, mat.char_time)
    body = _SphereBody(field, i0, j0, radius, pin_x, pin_z)
    job = FootprintJob("sphere", cells, impulse, mat,
                       collider_fn=body.collider, cell_area=field.cell_area)

    weight = np.array([0.0, -mass * GRAVITY, 0.0])
    peak_force = 0.0
    lines = [FORCES_HEADER]
    max_frames = math.ceil(cfg["scenario.duration"] / dt)
    frame = 0
    while frame < max_frames:
        t = frame * dt
        mom = momentum_force(impulse, t)
        f_total = weight + mom
        peak_force = max(peak_force, float(-f_total[1]))
        job.step(field, f_total, t, dt)
        grf = -f_total[1] / (mass * GRAVITY)
        cols = [fmt(t), "sphere", "contact", fmt(1.0),
                fmt(weight[0]), fmt(weight[1]), fmt(weight[2]),
                fmt(mom[0]), fmt(mom[1]), fmt(mom[2]),
                fmt(f_total[0]), fmt(f_total[1]), fmt(f_total[2]), fmt(grf)]
        lines.append(",".join(cols))
        frame += 1
        if not job.active:
            break

    summary = FootprintSummary("sphere", 0.0, job.mean_depth,
                               job.carved_volume, job.bump_volume)
    depth = float(field.c_acc.max())
    if cfg["output.forces"]:
        (out / "forces.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "heightmap_final.pgm").write_text(
        to_pgm(field.display_height(mat.blur_sigma_cm)), encoding="utf-8")
    (out / "sphere_summary.csv").write_text(
        "mass,radius,drop_height,impact_speed,peak_force,final_depth,"
        "carved_volume,bump_volume,frames\n"
        + ",".join([fmt(mass), fmt(radius), fmt(drop), fmt(v), fmt(peak_force),
                    fmt(depth), fmt(job.carved_volume), fmt(job.bump_volume),
                    str(frame)]) + "\n", encoding="utf-8")
    return RunReport(frames=frame, frame_times_ms=[], footprints=[summary],
                     status="done")


def run_gallery(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Identical walks over every material preset, plus a comparison table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["material,young_modulus,poisson_ratio,char_time,footprints,"
             "mean_depth,carved_volume,bump_volume,bump_ratio"]
    all_footprints: list[FootprintSummary] = []
    frames = 0
    for name in GALLERY_ORDER:
        sub = cfg.clone()
        sub.values["material.preset"] = name
        for key in list(sub.explicit):
            if key.startswith("material."):
                sub.explicit.discard(key)
        for field_name in ("young_modulus", "poisson_ratio", "char_time",
                           "loose_depth", "blur_sigma_cm", "contour_radius"):
            sub.values[f"material.{field_name}"] = None
        report = run_walk(sub, out / name)
        mat = PRESETS[name]
        prints = report.footprints
        mean_depth = (sum(s.mean_depth for s in prints) / len(prints)) if prints else 0.0
        carved = sum(s.carved_volume for s in prints)
        bump = sum(s.bump_volume for s in prints)
        ratio = bump / carved if carved > 0 else 0.0
        lines.append(",".join([
            name, fmt(mat.young_modulus), fmt(mat.poisson_ratio),
            fmt(mat.char_time), str(len(prints)), fmt(mean_depth),
            fmt(carved), fmt(bump), fmt(ratio)]))
        all_footprints.extend(prints)
        frames += report.frames
    (out / "gallery_summary.csv").write_text("\n".join(lines) + "\n",
                                             encoding="utf-8")
    return RunReport(frames=frames, frame_times_ms=[],
                     footprints=all_footprints, status="done")


RUNNERS = {
    "walk": run_walk,
    "stand": run_stand,
    "sphere_drop": run_sphere_drop,
    "slope_walk": run_slope_walk,
    "gallery": run_gallery,
}


def run_scenario(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    return RUNNERS[cfg.kind](cfg, out_dir)


def write_bench_report(report: RunReport, out_dir: Path | str) -> Path:
    """Frame-time table plus a one-line summary for the bench command."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["frame,ms"]
    for k, ms in enumerate(report.frame_times_ms):
        lines.append(f"{k},{fmt(ms)}")
    times = np.array(report.frame_times_ms) if report.frame_times_ms else np.zeros(1)
    lines.append(f"# frames={report.frames} median_ms={fmt(float(np.median(times)))} "
                 f"p90_ms={fmt(float(np.percentile(times, 90)))} "
                 f"max_ms={fmt(float(times.max()))}")
    path = out / "bench.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def run_bench(cfg: ScenarioConfig, out_dir: Path | str) -> RunReport:
    """Timing run: steps the simulation with no file sinks in the loop."""
    mat = cfg.material()
    sim = make_simulation(cfg, material=mat)
    report = sim.run(cfg["scenario.duration"], OutputSinks())
    write_bench_report(report, out_dir)
    return report
