"""Command-line driver: ``vfplan plan`` and ``vfplan sweep``.

Exit codes: 0 success, 1 bad input, 2 infeasible plan, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from .config import PROFILES
from .estimator import ViewpointPlanner, check_floorplan
from .exceptions import (
    FloorplanParseError,
    FloorplanValidationError,
    InfeasibleError,
    OracleLimitError,
    SkeletonError,
)
from .metrics import format_report
from .overlap import METRICS
from .render import render_plan_svg
from .scenes import SCENES, scene_dict
from .vfield import export_field

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3
SWEEP_AXES = {"tau": "tau", "r_max": "r_max", "resolution": "resolution", "partition_length": "partition_length"}


class InputError(Exception):
    pass


def _load_input(source: str):
    """Floorplan path, or ``scene:NAME`` for a bundled synthetic scene."""
    if source.startswith("scene:"):
        name = source.split(":", 1)[1]
        if name not in SCENES:
            raise InputError(f"unknown scene {name!r}; choose from {', '.join(sorted(SCENES))}")
        return check_floorplan(scene_dict(name))
    path = Path(source)
    if not path.is_file():
        raise InputError(f"input file not found: {source}")
    return check_floorplan(path)


def _add_config_args(p):
    p.add_argument("--input", required=True, help="floorplan JSON path or scene:NAME")
    p.add_argument("--profile", choices=sorted(PROFILES), default="indoor")
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--resolution", type=float)
    p.add_argument("--partition", type=float, dest="partition_length")
    p.add_argument("--tau", type=float)
    p.add_argument("--overlap-metric", choices=[m.replace("_", "-") for m in METRICS])
    p.add_argument("--include-openings", action="store_true")
    p.add_argument("--windows-opaque", action="store_true")
    p.add_argument("--reinforce-cycles", action="store_true")
    p.add_argument("--threads", type=int, default=1)


def _planner(args, **override) -> ViewpointPlanner:
    params = dict(
        profile=args.profile,
        r_min=args.r_min,
        r_max=args.r_max,
        resolution=args.resolution,
        partition_length=args.partition_length,
        tau=args.tau,
        overlap_metric=args.overlap_metric,
        include_openings=args.include_openings,
        windows_opaque=args.windows_opaque,
        reinforce_cycles=args.reinforce_cycles,
        n_threads=max(1, args.threads),
    )
    params.update(override)
    planner = ViewpointPlanner(**params)
    planner.get_config()  # validate before any heavy work
    return planner


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfplan", description="Viewpoint planning for laser scanning of floorplans.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{plan,sweep}")

    plan = sub.add_parser("plan", help="plan a viewpoint network")
    _add_config_args(plan)
    plan.add_argument("--out", required=True, help="output directory")
    plan.add_argument("--emit-vf", action="store_true", help="also write visibility and distance fields")

    sweep = sub.add_parser("sweep", help="re-plan over a list of parameter values")
    _add_config_args(sweep)
    sweep.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--out", help="CSV path (default: standard output)")

    # fixture generation for the test suite; not listed in --help
    oracle = sub.add_parser("oracle")
    _add_config_args(oracle)
    oracle.add_argument("--max-candidates", type=int, default=18)
    oracle.add_argument("--out", help="JSON path (default: standard output)")
    return parser


def run_plan(args) -> int:
    fp = _load_input(args.input)
    planner = _planner(args).fit(fp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "network.json").write_text(planner.network_json(), encoding="utf-8")
    table = format_report(planner.report_)
    (out / "metrics.txt").write_text(table + "\n", encoding="utf-8")
    (out / "plan.svg").write_text(render_plan_svg(planner), encoding="utf-8")
    timings = {k: round(v * 1000.0, 3) for k, v in planner.timings_.items()}
    (out / "timings.json").write_text(json.dumps({"stage_ms": timings}, indent=2) + "\n", encoding="utf-8")
    if args.emit_vf:
        export_field(planner.visibility_field(), out / "vf.pgm", write_csv=True)
        export_field(planner.distance_field_, out / "distance.pgm", write_csv=True)
    print(table)
    return EXIT_OK


def _peak_mem_mb():
    try:
        import resource
    except ImportError:
        return None
    # ru_maxrss is in KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _parse_values(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"--values: {exc}") from exc
    if not vals:
        raise InputError("--values must list at least one number")
    return vals


def run_sweep(args) -> int:
    values = _parse_values(args.values)
    fp = _load_input(args.input)
    _planner(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "status", "vc", "wapl", "runtime_ms", "peak_mem_mb"])
    for v in values:
        t = time.perf_counter()
        try:
            planner = _planner(args, **{SWEEP_AXES[args.axis]: v}).fit(fp)
            rep = planner.report_
            row = ["ok", rep.vc, repr(rep.wapl)]
        except InfeasibleError:
            row = ["infeasible", "", ""]
        except (SkeletonError, ValueError) as exc:
            row = [f"error: {exc}".replace("\n", " "), "", ""]
        ms = (time.perf_counter() - t) * 1000.0
        mem = _peak_mem_mb()
        w.writerow([repr(v), *row, f"{ms:.1f}", "" if mem is None else f"{mem:.1f}"])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def run_oracle(args) -> int:
    from .oracle import exact_solve

    fp = _load_input(args.input)
    planner = _planner(args).fit(fp)
    sol = exact_solve(planner.coverage_table_.matrix, planner.graph_.adjacency, args.max_candidates)
    payload = {
        "candidates": len(planner.candidates_),
        "segments": len(planner.boundary_),
        **sol.to_dict(),
        "greedy_cover_stage": list(planner.network_.coverage_stage),
        "greedy_vc": len(planner.network_.selected),
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"plan": run_plan, "sweep": run_sweep, "oracle": run_oracle}[args.command]
    try:
        return handler(args)
    except InfeasibleError as exc:
        print(exc.report(), file=sys.stderr)
        return EXIT_INFEASIBLE
    except FloorplanParseError as exc:
        print(f"vfplan: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FloorplanValidationError, SkeletonError, OracleLimitError, InputError, ValueError) as exc:
        print(f"vfplan: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal-error code
        print(f"vfplan: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
