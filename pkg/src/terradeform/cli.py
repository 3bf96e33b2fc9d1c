"""Command line interface.

  terradeform run <config> [--out DIR] [--set key=value]... [--plot]
  terradeform bench <config> [--out DIR] [--set key=value]...
  terradeform report <run-dir>
  terradeform presets

Exit code 0 on success; configuration problems exit 2 and runtime failures
exit 1, both with a single machine-readable ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from . import report as report_mod
from .config import ConfigError, apply_overrides, parse_config_file
from .materials import PRESETS
from .scenarios import fmt, run_bench, run_scenario


def _load_config(args):
    cfg = parse_config_file(args.config)
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    return cfg


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    return Path("out") / cfg.kind


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    report = run_scenario(cfg, out)
    print(f"{cfg.kind}: {report.frames} frames, status={report.status}, "
          f"{len(report.footprints)} footprints -> {out}")
    if args.plot:
        for path in report_mod.render_run(out):
            print(f"figure: {path}")
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    report = run_bench(cfg, out)
    print(f"bench: {report.frames} frames, median {fmt(report.median_frame_ms)} ms "
          f"per step, status={report.status} -> {out}/bench.csv")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"no run directory at {run_dir}")
    for path in report_mod.render_run(run_dir):
        print(f"figure: {path}")
    return 0


def cmd_presets(args) -> int:
    cols = ("young_modulus", "poisson_ratio", "char_time", "loose_depth",
            "blur_sigma_cm", "contour_radius")
    print("name," + ",".join(cols))
    for name, mat in PRESETS.items():
        values = asdict(mat)
        print(name + "," + ",".join(fmt(values[c]) for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="terradeform",
        description="Deterministic soft-ground locomotion simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario config")
    run_p.add_argument("config", help="path to a scenario config file")
    run_p.add_argument("--out", help="output directory (default out/<kind>)")
    run_p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
    run_p.add_argument("--plot", action="store_true",
                       help="render figures from the outputs")
    run_p.set_defaults(fn=cmd_run)

    bench_p = sub.add_parser("bench", help="measure per-frame step times")
    bench_p.add_argument("config")
    bench_p.add_argument("--out", help="output directory (default out/<kind>)")
    bench_p.add_argument("--set", action="append", default=[],
                         metavar="KEY=VALUE")
    bench_p.set_defaults(fn=cmd_bench)

    report_p = sub.add_parser("report", help="render figures for a finished run")
    report_p.add_argument("run_dir")
    report_p.set_defaults(fn=cmd_report)

    presets_p = sub.add_parser("presets", help="list material presets")
    presets_p.set_defaults(fn=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
