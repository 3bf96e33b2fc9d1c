"""Render figures from a run directory's delimited outputs.

Consumes the CSV and PGM files a scenario wrote and saves PNG figures
alongside them: force traces, the final terrain, footprint depths and
frame-time distributions. Purely a downstream view of the files; nothing
here touches the simulation.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .heightfield import from_pgm  # noqa: E402


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.DictReader(fh)
                if not row.get("frame", "").startswith("#")]


def plot_forces(forces_csv: Path, out_png: Path) -> Path:
    """Three stacked traces: per-foot vertical weight force, per-foot
    vertical momentum force, and the normalized total vertical ground
    reaction."""
    rows = _read_csv(forces_csv)
    feet = sorted({r["foot"] for r in rows})
    fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)
    for foot in feet:
        sel = [r for r in rows if r["foot"] == foot]
        t = np.array([float(r["t"]) for r in sel])
        axes[0].plot(t, [-float(r["Fw_y"]) for r in sel], label=foot)
        axes[1].plot(t, [-float(r["Fm_y"]) for r in sel], label=foot)
    first = rows[0]["foot"] if rows else ""
    sel = [r for r in rows if r["foot"] == first]
    t = np.array([float(r["t"]) for r in sel])
    axes[2].plot(t, [float(r["grf_norm"]) for r in sel], color="k")
    axes[0].set_ylabel("weight force (N)")
    axes[1].set_ylabel("momentum force (N)")
    axes[2].set_ylabel("total vertical GRF / m g")
    axes[2].set_xlabel("time (s)")
    for ax in axes[:2]:
        ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def plot_heightmap(pgm_path: Path, out_png: Path) -> Path:
    """Terrain snapshot as an image with a height colorbar."""
    grid = from_pgm(pgm_path.read_text(encoding="utf-8"))
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(grid.T, origin="lower", cmap="terrain")
    fig.colorbar(im, ax=ax, label="height (m)")
    ax.set_xlabel("x cells")
    ax.set_ylabel("z cells")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def plot_footprints(footprints_csv: Path, out_png: Path) -> Path:
    """Depth and volume of each completed footprint over the run."""
    rows = _read_csv(footprints_csv)
    fig, ax = plt.subplots(figsize=(8, 4))
    if rows:
        t0 = [float(r["t0"]) for r in rows]
        depth = [100.0 * float(r["mean_depth"]) for r in rows]
        colors = ["tab:blue" if r["foot"] == "left" else "tab:orange"
                  for r in rows]
        ax.bar(t0, depth, width=0.12, color=colors)
    ax.set_xlabel("contact time (s)")
    ax.set_ylabel("mean footprint depth (cm)")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def plot_frame_times(bench_csv: Path, out_png: Path) -> Path:
    rows = [r for r in _read_csv(bench_csv) if r.get("ms")]
    ms = np.array([float(r["ms"]) for r in rows])
    fig, ax = plt.subplots(figsize=(8, 4))
    if len(ms):
        ax.plot(ms, lw=0.8)
        ax.axhline(float(np.median(ms)), color="r", ls="--",
                   label=f"median {np.median(ms):.2f} ms")
        ax.legend()
    ax.set_xlabel("frame")
    ax.set_ylabel("step time (ms)")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def render_run(run_dir: Path | str) -> list[Path]:
    """Render every figure the directory's files support; returns the
    written paths."""
    run_dir = Path(run_dir)
    written: list[Path] = []
    forces = run_dir / "forces.csv"
    if forces.exists():
        written.append(plot_forces(forces, run_dir / "forces.png"))
    footprints = run_dir / "footprints.csv"
    if footprints.exists():
        written.append(plot_footprints(footprints, run_dir / "footprints.png"))
    bench = run_dir / "bench.csv"
    if bench.exists():
        written.append(plot_frame_times(bench, run_dir / "frame_times.png"))
    for pgm in sorted(run_dir.glob("*.pgm")):
        written.append(plot_heightmap(pgm, pgm.with_suffix(".png")))
    for sub in sorted(p for p in run_dir.iterdir() if p.is_dir()):
        written.extend(render_run(sub))
    return written
