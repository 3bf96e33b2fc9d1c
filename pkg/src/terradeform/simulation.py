"""Fixed-step frame loop coupling gait, forces, and terrain deformation.

Each frame runs, in order: gait targets and foot placement (which emits
contact events), weight split and impulse creation for new contacts,
per-foot force assembly, deformation stepping of every active footprint
job in creation order, and finally the balance controller and rigid-body
update. Terrain feedback into foot placement is therefore one frame
delayed.

Time is ``frame * dt`` exactly; there is no hidden randomness anywhere,
so a run is a pure function of its configuration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .character import (FEET, LEFT, RIGHT, CharacterState, GaitPlanner,
                        controller_torque, place_feet, step_rigid_body)
from .deformation import FootprintJob
from .forces import (FootForces, ForceBreakdown, ImpulseWindow, impact_impulse,
                     momentum_force, weight_forces, weight_ratio)
from .contact import contact_window
from .heightfield import Heightfield
from .materials import MaterialParams

STATUS_RUNNING = "running"
STATUS_DONE = "done"
STATUS_BOUNDARY = "boundary"
STATUS_PARTIAL = "partial-output"


@dataclass
class FootprintSummary:
    foot: str
    t0: float
    mean_depth: float
    carved_volume: float
    bump_volume: float


@dataclass
class RunReport:
    frames: int
    frame_times_ms: list[float]
    footprints: list[FootprintSummary]
    status: str

    @property
    def median_frame_ms(self) -> float:
        if not self.frame_times_ms:
            return 0.0
        return float(np.median(self.frame_times_ms))


class OutputSinks:
    """Hooks the runner uses to flush per-frame rows and snapshots.

    The default implementation discards everything; scenario runners
    override the pieces they need.
    """

    def on_frame(self, sim: "Simulation", breakdown: ForceBreakdown) -> None:
        pass

    def on_job_complete(self, sim: "Simulation", summary: FootprintSummary) -> None:
        pass

    def on_finish(self, sim: "Simulation", report: RunReport) -> None:
        pass


class Simulation:
    """One character walking (or standing) on one deformable terrain."""

    def __init__(self, field: Heightfield, material: MaterialParams,
                 character: CharacterState, planner: GaitPlanner,
                 dt: float = 1.0 / 60.0, window_side: float = 0.40):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.field = field
        self.material = material
        self.character = character
        self.planner = planner
        self.dt = dt
        self.window_side = window_side
        self.frame = 0
        self.jobs: list[FootprintJob] = []
        self.completed: list[FootprintSummary] = []
        self.impulse_windows: dict[str, ImpulseWindow] = {}
        self.status = STATUS_RUNNING
        self.breakdown_log: list[ForceBreakdown] = []
        self._spawn_initial_contacts()

    @property
    def t(self) -> float:
        return self.frame * self.dt

    def _spawn_initial_contacts(self) -> None:
        """Plant feet that start on the ground (zero impact velocity)."""
        targets = self.planner.targets(0.0, tilt=self.character.tilt)
        events = place_feet(self.character, targets, self.field, 0.0,
                            planner=self.planner)
        # feet initialized mid-air produce no event; grounded starts press
        # statically from frame 0
        self._pending_events = events

    def _out_of_bounds(self) -> bool:
        margin = (self.planner.params.step_length + self.window_side
                  + 2.0 * self.field.cell_size)
        x = self.character.root[0]
        z = self.character.root[2]
        return not (margin / 2.0 <= x <= self.field.width_m - margin
                    and 0.0 <= z <= self.field.depth_m)

    def step(self) -> ForceBreakdown:
        """Advance one frame; returns the frame's force breakdown."""
        t = self.t
        ch = self.character

        # (1) gait targets and foot placement
        if self.frame == 0:
            events = self._pending_events
        else:
            targets = self.planner.targets(t, tilt=ch.tilt)
            events = place_feet(ch, targets, self.field, t, planner=self.planner)

        # (2) weight split, impulses for fresh contacts
        lf, rf = ch.feet[LEFT], ch.feet[RIGHT]
        ratio = weight_ratio((lf.position[0], lf.position[2]),
                             (rf.position[0], rf.position[2]),
                             ch.com_ground_point())
        w_left, w_right = weight_forces(ch.mass, ratio.value,
                                        lf.grounded, rf.grounded)
        for ev in events:
            frozen = ratio.value if ev.foot == RIGHT else 1.0 - ratio.value
            if not (lf.grounded and rf.grounded):
                frozen = 1.0
            impulse = impact_impulse(frozen, ch.mass, ev.v_prev)
            window = ImpulseWindow(impulse, ev.t0, self.material.char_time)
            self.impulse_windows[ev.foot] = window
            cells = contact_window((ev.pin[0], ev.pin[2]), self.window_side,
                                   self.field)
            job = FootprintJob(ev.foot, cells, window, self.material,
                               collider_fn=lambda name=ev.foot: ch.foot_collider(name),
                               cell_area=self.field.cell_area)
            self.jobs.append(job)

        # (3) per-foot force assembly
        feet_forces = {}
        for name, wf, grounded in ((LEFT, w_left, lf.grounded),
                                   (RIGHT, w_right, rf.grounded)):
            win = self.impulse_windows.get(name)
            mom = momentum_force(win, t) if win is not None else np.zeros(3)
            share = 0.0
            if grounded:
                share = 1.0
                if lf.grounded and rf.grounded:
                    share = ratio.value if name == RIGHT else 1.0 - ratio.value
            feet_forces[name] = FootForces(weight=wf, momentum=mom,
                                           grounded=grounded, ratio=share)
        breakdown = ForceBreakdown(feet=feet_forces, ratio_right=ratio.value,
                                   degenerate_support=ratio.degenerate)

        # (4) deformation jobs, in creation order
        still_active: list[FootprintJob] = []
        for job in self.jobs:
            job.step(self.field, breakdown.feet[job.foot].foot, t, self.dt)
            if job.active:
                still_active.append(job)
            else:
                self.completed.append(FootprintSummary(
                    job.foot, job.t0, job.mean_depth,
                    job.carved_volume, job.bump_volume))
        self.jobs = still_active

        # (5) balance controller and rigid-body update
        torque = controller_torque(ch, self.field, ch.gain_kp, ch.gain_kd)
        step_rigid_body(ch, torque, self.dt)

        # (6) bookkeeping
        self.breakdown_log.append(breakdown)
        self.frame += 1
        if self._out_of_bounds():
            self.status = STATUS_BOUNDARY
        return breakdown

    def run(self, duration: float, sinks: OutputSinks | None = None) -> RunReport:
        """Step for the requested duration, flushing rows to the sinks.

        Stops early with a boundary status if the character reaches the
        edge of the terrain. The report carries one wall-clock timing per
        executed frame.
        """
        if duration <= 0:
            raise ValueError("duration must be positive")
        sinks = sinks or OutputSinks()
        n_frames = math.ceil(duration / self.dt)
        timings: list[float] = []
        for _ in range(n_frames):
            if self.status != STATUS_RUNNING:
                break
            done_before = len(self.completed)
            start = time.perf_counter()
            breakdown = self.step()
            timings.append((time.perf_counter() - start) * 1000.0)
            try:
                sinks.on_frame(self, breakdown)
                for summary in self.completed[done_before:]:
                    sinks.on_job_complete(self, summary)
            except OSError as exc:
                self.status = f"{STATUS_PARTIAL}: {exc}"
                break
        if self.status == STATUS_RUNNING:
            self.status = STATUS_DONE
        report = RunReport(frames=len(timings), frame_times_ms=timings,
                           footprints=list(self.completed), status=self.status)
        sinks.on_finish(self, report)
        return report
