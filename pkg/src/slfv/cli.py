"""Command-line front door: config parsing, experiment dispatch, outputs.

Outputs per experiment: one CSV of per-replica records, one JSON summary,
and a manifest.json listing every written file with its SHA-256. Exit code
0 on success, 2 on configuration errors, 3 when results were produced but
flagged (budget exhaustion or unreliable diagnostics).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import jsonschema

from . import experiments
from .errors import BudgetExceededError, ConfigError, SlfvError
from .events import replica_stream
from .measure import RadiusMeasure, slow_chain_params, unit_model
from .occupancy import Disk, HalfPlane, PointSet, SeedUnion, origin_seed
from .simulator import (AdaptiveWindow, EventCount, FixedWindow, HalfPlaneReached,
                        PointCovered, SegmentCovered, TimeHorizon, TwoTypeRule,
                        default_strip_window, run_forward)
from . import chains

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED = 0, 2, 3

_MEASURE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "atoms": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["r", "mass"],
            "properties": {"r": {"type": "number"}, "mass": {"type": "number"}}}},
        "uniform": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["lo", "hi", "mass"],
            "properties": {"lo": {"type": "number"}, "hi": {"type": "number"},
                           "mass": {"type": "number"}}}},
    },
}

_SEED_REGION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["origin", "points", "halfplane", "disk", "union"]},
        "points": {"type": "array", "items": {
            "type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}},
        "x0": {"type": "number"},
        "center": {"type": "array", "minItems": 2, "maxItems": 2,
                   "items": {"type": "number"}},
        "radius": {"type": "number"},
        "parts": {"type": "array"},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["measure"],
    "properties": {
        "measure": _MEASURE_SCHEMA,
        "seed_region": _SEED_REGION_SCHEMA,
        "master_seed": {"type": "integer"},
        "out_dir": {"type": "string"},
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "xs": {"type": "array", "items": {"type": "number"}},
                "x": {"type": "number"},
                "reps": {"type": "integer", "minimum": 1},
                "window_a": {"type": "number", "exclusiveMinimum": 0},
                "budget": {"type": "integer", "minimum": 1},
                "mode": {"enum": ["point-seed", "halfplane-window"]},
                "ts": {"type": "array", "items": {"type": "number"}},
                "n_dir": {"type": "integer", "minimum": 8},
                "t_horizon": {"type": "number"},
                "disk_radius": {"type": "number"},
                "rule": {"enum": ["x", "y", "sectors"]},
                "sectors": {"type": "integer", "minimum": 2},
                "delta": {"type": "number"},
                "betas": {"type": "array", "items": {"type": "number"}},
                "n_samples": {"type": "integer", "minimum": 1},
                "runs": {"type": "integer", "minimum": 1},
                "n_events": {"type": "integer", "minimum": 1},
                "points_per_run": {"type": "integer", "minimum": 1},
                "stop": {"type": "object"},
                "threads": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULTS = {
    "xs": [25.0, 50.0, 100.0, 200.0, 400.0],
    "reps": 200,
    "window_a": 6.0,
    "budget": 1_000_000_000,
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {"measure": unit_model().to_json_dict()}
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "$" + "".join(f"[{p!r}]" for p in e.absolute_path)
        raise ConfigError(f"config invalid at {path}: {e.message}") from e


def build_measure(cfg: dict) -> RadiusMeasure:
    try:
        return RadiusMeasure.from_json_dict(cfg["measure"])
    except KeyError as e:
        raise ConfigError(f"config missing required key $['measure']: {e}") from e


def build_seed_region(spec: dict | None):
    if spec is None:
        return origin_seed()
    kind = spec["kind"]
    if kind == "origin":
        return origin_seed()
    if kind == "points":
        return PointSet(points=tuple(tuple(p) for p in spec["points"]))
    if kind == "halfplane":
        return HalfPlane(x0=spec.get("x0", 0.0))
    if kind == "disk":
        c = spec.get("center", [0.0, 0.0])
        return Disk(cx=c[0], cy=c[1], r=spec["radius"])
    if kind == "union":
        return SeedUnion(parts=tuple(build_seed_region(p) for p in spec["parts"]))
    raise ConfigError(f"unknown seed region kind {kind!r}")


def _write_manifest(out_dir: str, files: list) -> None:
    manifest_path = os.path.join(out_dir, "manifest.json")
    previous = None
    if os.path.exists(manifest_path):
        try:
            with open(manifest_path) as f:
                previous = json.load(f)
        except (OSError, json.JSONDecodeError):
            previous = None
    entries = {}
    for name in files:
        with open(os.path.join(out_dir, name), "rb") as f:
            entries[name] = hashlib.sha256(f.read()).hexdigest()
    verified = None
    if previous and "files" in previous:
        shared = set(entries) & set(previous["files"])
        verified = bool(shared) and all(entries[k] == previous["files"][k] for k in shared)
    with open(manifest_path, "w") as f:
        json.dump({"files": entries, "verified_against_previous": verified}, f,
                  indent=2, sort_keys=True)
        f.write("\n")


def _emit(result, out_dir: str) -> list:
    os.makedirs(out_dir, exist_ok=True)
    csv_name = f"{result.experiment}.csv"
    json_name = f"{result.experiment}_summary.json"
    result.to_csv(os.path.join(out_dir, csv_name))
    result.to_json(os.path.join(out_dir, json_name))
    return [csv_name, json_name]


def _exp_params(cfg: dict, args) -> dict:
    p = dict(cfg.get("experiment", {}))
    if getattr(args, "xs", None):
        p["xs"] = [float(v) for v in args.xs.split(",")]
    if getattr(args, "x", None) is not None:
        p["x"] = args.x
    if getattr(args, "reps", None) is not None:
        p["reps"] = args.reps
    if getattr(args, "window_a", None) is not None:
        p["window_a"] = args.window_a
    return p


def _common(sub):
    sub.add_argument("--config", default=None, help="JSON config path")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--reps", type=int, default=None)
    sub.add_argument("--window-a", dest="window_a", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="slfv",
        description="Event-driven simulator and statistics suite for the "
                    "infinity-parent spatial Lambda-Fleming-Viot growth process")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("simulate", "single forward run; writes events.csv and run_summary.json"),
        ("nu", "front speed estimation"),
        ("exponent", "wandering exponent fit"),
        ("gap", "front-bulk gap scaling"),
        ("duality", "point-seed vs windowed half-plane hitting laws"),
        ("shape", "directional reach scan"),
        ("slowchain", "slow coverage chain sampling and tail bounds"),
        ("sectors", "two-type sector persistence"),
        ("skeleton-check", "forward/backward equivalence check"),
    ]:
        s = sub.add_parser(name, help=helptext)
        _common(s)
        if name in ("nu", "exponent", "gap"):
            s.add_argument("--xs", default=None, help="comma-separated x values")
        if name in ("duality", "slowchain"):
            s.add_argument("--x", type=float, default=None)
        if name == "simulate":
            s.add_argument("--stop-events", type=int, default=None)
            s.add_argument("--stop-time", type=float, default=None)
            s.add_argument("--stop-halfplane", type=float, default=None)
            s.add_argument("--stop-point", default=None, help="x,y")
            s.add_argument("--two-type", action="store_true")
            s.add_argument("--geodesic", action="store_true",
                           help="extract a geodesic and write geodesic.csv")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        measure = build_measure(cfg)
        seed_region = build_seed_region(cfg.get("seed_region"))
    except (ConfigError, SlfvError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    master_seed = args.seed if args.seed is not None else cfg.get("master_seed", 0)
    out_dir = args.out if args.out != "out" or "out_dir" not in cfg else cfg["out_dir"]
    p = _exp_params(cfg, args)
    xs = p.get("xs", DEFAULTS["xs"])
    reps = p.get("reps", DEFAULTS["reps"])
    window_a = p.get("window_a", DEFAULTS["window_a"])
    budget = p.get("budget", DEFAULTS["budget"])
    threads = p.get("threads")

    try:
        if args.command == "simulate":
            return _cmd_simulate(args, p, cfg, measure, seed_region, master_seed,
                                 out_dir, budget)
        if args.command == "nu":
            result = experiments.estimate_nu(xs, reps, measure, master_seed,
                                             strip_a=window_a, budget=budget,
                                             threads=threads)
        elif args.command == "exponent":
            result = experiments.exponent_fit(xs, reps, measure, master_seed,
                                              strip_a=window_a, budget=budget,
                                              threads=threads)
        elif args.command == "gap":
            result = experiments.front_bulk_gap(
                xs, reps, measure, master_seed, mode=p.get("mode", "point-seed"),
                strip_a=window_a, budget=budget, threads=threads)
        elif args.command == "duality":
            result = experiments.duality_check(
                p.get("x", 50.0), reps, measure, master_seed, strip_a=window_a,
                budget=budget, threads=threads)
        elif args.command == "shape":
            result = experiments.shape_scan(
                p.get("ts", [20.0, 80.0]), p.get("n_dir", 16), reps, measure,
                master_seed, budget=budget, threads=threads)
        elif args.command == "slowchain":
            result = _cmd_slowchain(p, measure, master_seed)
        elif args.command == "sectors":
            rule = TwoTypeRule(kind=p.get("rule", "x"), sectors=p.get("sectors", 2))
            result = experiments.sector_persistence(
                reps, measure, master_seed, t_horizon=p.get("t_horizon", 50.0),
                disk_radius=p.get("disk_radius", 5.0), rule=rule, budget=budget,
                threads=threads)
        else:  # skeleton-check
            result = experiments.skeleton_check(
                p.get("runs", 1000), measure, master_seed,
                n_events=p.get("n_events", 50),
                points_per_run=p.get("points_per_run", 20), threads=threads)
    except SlfvError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    files = _emit(result, out_dir)
    _write_manifest(out_dir, files)
    if result.flagged:
        print(f"flagged: {result.flag_reason}", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def _cmd_slowchain(p: dict, measure, master_seed: int):
    params = slow_chain_params(measure, delta_override=p.get("delta"))
    x = p.get("x", 3.0)
    betas = p.get("betas", [35.0, 40.0])
    n_samples = p.get("n_samples", 100_000)
    result = experiments.tail_validator(
        measure, master_seed,
        {"slow": {"delta": params.delta, "x": x, "betas": betas,
                  "n_samples": n_samples}})
    result.params["slow_chain"] = {"delta": params.delta, "eta": params.eta,
                                   "step_rate": params.step_rate}
    return result


def _cmd_simulate(args, p, cfg, measure, seed_region, master_seed, out_dir, budget) -> int:
    if args.stop_events is not None:
        stop = EventCount(args.stop_events)
    elif args.stop_time is not None:
        stop = TimeHorizon(args.stop_time)
    elif args.stop_halfplane is not None:
        stop = HalfPlaneReached(args.stop_halfplane)
    elif args.stop_point is not None:
        zx, zy = (float(v) for v in args.stop_point.split(","))
        stop = PointCovered((zx, zy))
    else:
        stop = EventCount(100)

    rng = replica_stream(master_seed, 0)
    flagged = False
    from .simulator import run_two_type
    try:
        if args.two_type:
            log, report = run_two_type(seed_region, TwoTypeRule(kind="x"), measure,
                                       rng, stop, AdaptiveWindow(), budget=budget)
        else:
            log, report = run_forward(seed_region, measure, rng, stop,
                                      AdaptiveWindow(), budget=budget)
    except BudgetExceededError as e:
        log, report, flagged = e.log, e.report, True

    os.makedirs(out_dir, exist_ok=True)
    files = ["events.csv", "run_summary.json"]
    log.to_csv(os.path.join(out_dir, "events.csv"))
    summary = {
        "replica": 0,
        "stop_time": report.stop_time,
        "n_events": report.n_events,
        "n_candidates": report.candidate_count,
        "truncated": report.truncation_flag,
        "milestones": report.milestones,
        "master_seed": master_seed,
    }
    if args.geodesic and report.trigger_event_id is not None:
        geo = chains.extract_geodesic(log, report.trigger_event_id, rng, seed_region)
        st = chains.chain_stats(geo)
        _write_geodesic_csv(os.path.join(out_dir, "geodesic.csv"), geo)
        files.append("geodesic.csv")
        summary["geodesic"] = {"n_jumps": st.n, "y_end": st.y_end,
                               "max_abs_y": st.max_abs_y,
                               "strip_radius": st.strip_radius}
    with open(os.path.join(out_dir, "run_summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_manifest(out_dir, files)
    return EXIT_FLAGGED if flagged else EXIT_OK


def _write_geodesic_csv(path: str, geo) -> None:
    import csv as _csv

    with open(path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(["step", "time", "cx", "cy", "radius"])
        for i, link in enumerate(geo.links):
            w.writerow([i, repr(link.time), repr(link.cx), repr(link.cy),
                        repr(link.radius)])


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
