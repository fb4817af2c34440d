"""Offline renderer for the growth simulator's CSV/JSON outputs.

Read-only over its inputs: every figure kind consumes the documented
delimited files (events.csv, nu.csv, exponent.csv, gap.csv, shape.csv and
their *_summary.json companions) and writes a single PNG/SVG. No simulation
logic lives here.
"""
from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import CircleCollection  # noqa: F401  (re-export convenience)
from matplotlib.patches import Circle

KINDS = ("speed-convergence", "loglog-exponent", "gap-scaling", "shape-polar",
         "sector-snapshot", "interface-snapshot")

_SAVEFIG_METADATA = {"png": {"Software": "render_figs"},
                     "svg": {"Date": None}}


class SchemaError(Exception):
    """An input file is missing or does not match its documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    in_dir: str
    kind: str
    out_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def _read_csv(path, required):
    if not os.path.exists(path):
        raise SchemaError(f"missing input file {path}")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        cols = reader.fieldnames or []
        missing = [c for c in required if c not in cols]
        if missing:
            raise SchemaError(f"{path} lacks required columns {missing}; has {cols}")
        rows = list(reader)
    return rows


def _read_summary(path):
    if not os.path.exists(path):
        raise SchemaError(f"missing summary file {path}")
    with open(path) as f:
        return json.load(f)


def _finish(fig, spec: FigureSpec):
    out_dir = os.path.dirname(os.path.abspath(spec.out_path)) or "."
    in_dir = os.path.abspath(spec.in_dir)
    if os.path.commonpath([out_dir, in_dir]) == in_dir:
        raise ValueError(f"refusing to write into the data directory {in_dir}")
    os.makedirs(out_dir, exist_ok=True)
    ext = os.path.splitext(spec.out_path)[1].lstrip(".").lower() or "png"
    fig.savefig(spec.out_path, dpi=150, metadata=_SAVEFIG_METADATA.get(ext))
    plt.close(fig)


def _empty(ax, spec, why):
    warnings.warn(f"{spec.kind}: {why}; rendering axes only")
    ax.set_title(f"{spec.kind} (no data)")


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for a spec without saving it."""
    return {"speed-convergence": _render_speed,
            "loglog-exponent": _render_exponent,
            "gap-scaling": _render_gap,
            "shape-polar": _render_shape,
            "sector-snapshot": _render_snapshot,
            "interface-snapshot": _render_snapshot}[spec.kind](spec)


def render(spec: FigureSpec) -> str:
    """Render one figure to spec.out_path; returns the output path."""
    fig = build_figure(spec)
    _finish(fig, spec)
    return spec.out_path


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def _render_snapshot(spec: FigureSpec):
    rows = _read_csv(os.path.join(spec.in_dir, "events.csv"),
                     ["id", "time", "cx", "cy", "radius"])
    two_type = spec.kind == "sector-snapshot"
    if two_type and rows and "type" not in rows[0]:
        raise SchemaError("sector-snapshot needs a 'type' column in events.csv")
    fig, ax = plt.subplots(figsize=(7, 7))
    ax.set_aspect("equal")
    if not rows:
        _empty(ax, spec, "events.csv has no accepted events")
        return fig
    times = np.array([float(r["time"]) for r in rows])
    t_lo, t_hi = times.min(), times.max()
    span = (t_hi - t_lo) or 1.0
    cmap = plt.get_cmap("viridis")
    type_colors = plt.get_cmap("tab10")
    # later events drawn on top, paler, so the interface reads front-out
    for r in rows:
        t = float(r["time"])
        frac = (t - t_lo) / span
        if two_type:
            base = type_colors(int(r["type"]) % 10)
            color = tuple(b + (1.0 - b) * 0.55 * frac for b in base[:3])
        else:
            color = cmap(0.25 + 0.7 * frac)
        ax.add_patch(Circle((float(r["cx"]), float(r["cy"])), float(r["radius"]),
                            facecolor=color, edgecolor="none", zorder=2 + frac))
    ax.autoscale_view()
    ax.relim()
    xs = [float(r["cx"]) for r in rows]
    ys = [float(r["cy"]) for r in rows]
    rs = [float(r["radius"]) for r in rows]
    pad = max(rs)
    ax.set_xlim(min(x - r for x, r in zip(xs, rs)) - pad, max(x + r for x, r in zip(xs, rs)) + pad)
    ax.set_ylim(min(y - r for y, r in zip(ys, rs)) - pad, max(y + r for y, r in zip(ys, rs)) + pad)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("occupied region" + (" by type" if two_type else " by event time"))
    return fig


# ---------------------------------------------------------------------------
# statistics figures
# ---------------------------------------------------------------------------

def _group(rows, key, val):
    out = {}
    for r in rows:
        out.setdefault(float(r[key]), []).append(float(r[val]))
    return dict(sorted(out.items()))


def _render_speed(spec: FigureSpec):
    rows = _read_csv(os.path.join(spec.in_dir, "nu.csv"),
                     ["x", "replica", "tau_halfplane", "tau_point"])
    fig, ax = plt.subplots(figsize=(7, 5))
    rows = [r for r in rows if r["tau_halfplane"] != ""]
    if not rows:
        _empty(ax, spec, "nu.csv has no completed replicas")
        return fig
    for col, label, marker in (("tau_halfplane", "half-plane target", "o"),
                               ("tau_point", "point target", "s")):
        by_x = _group(rows, "x", col)
        xs = np.array(list(by_x))
        means = np.array([np.mean(v) / x for x, v in by_x.items()])
        ses = np.array([np.std(v, ddof=1) / math.sqrt(len(v)) / x for x, v in by_x.items()])
        ax.errorbar(xs, means, yerr=2 * ses, marker=marker, capsize=3, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("mean hitting time / x")
    ax.set_title("front speed convergence")
    ax.legend()
    return fig


def _render_exponent(spec: FigureSpec):
    rows = _read_csv(os.path.join(spec.in_dir, "exponent.csv"),
                     ["x", "replica", "abs_y_end"])
    summary = _read_summary(os.path.join(spec.in_dir, "exponent_summary.json"))
    xi = summary.get("fits", {}).get("xi_hat")
    if xi is None:
        raise SchemaError("exponent_summary.json lacks fits.xi_hat")
    fig, ax = plt.subplots(figsize=(7, 5))
    if not rows:
        _empty(ax, spec, "exponent.csv has no replicas")
        return fig
    by_x = _group(rows, "x", "abs_y_end")
    xs = np.array(list(by_x))
    med = np.array([np.median(v) for v in by_x.values()])
    ax.loglog(xs, med, "o", label="median |Y_end|")
    anchor = med[-1]
    ax.loglog(xs, anchor * (xs / xs[-1]) ** xi, "-",
              label=f"fitted slope xi_hat = {xi}")
    ax.loglog(xs, anchor * (xs / xs[-1]) ** 0.5, "--", label="reference slope 1/2")
    ax.set_xlabel("x")
    ax.set_ylabel("median |Y_end|")
    ax.set_title("transverse endpoint displacement scaling")
    ax.legend()
    return fig


def _render_gap(spec: FigureSpec):
    rows = _read_csv(os.path.join(spec.in_dir, "gap.csv"), ["x", "replica", "gap"])
    fig, ax = plt.subplots(figsize=(7, 5))
    if not rows:
        _empty(ax, spec, "gap.csv has no replicas")
        return fig
    by_x = _group(rows, "x", "gap")
    xs = np.array(list(by_x))
    med = np.array([np.median(v) for v in by_x.values()])
    p90 = np.array([np.quantile(v, 0.9) for v in by_x.values()])
    ax.loglog(xs, med, "o-", label="median gap")
    ax.loglog(xs, p90, "s--", label="90th percentile")
    ax.loglog(xs, med[-1] * np.sqrt(xs / xs[-1]), ":", label="sqrt(x) reference")
    ax.set_xlabel("x")
    ax.set_ylabel("bulk coverage - first hitting")
    ax.set_title("front-bulk gap scaling")
    ax.legend()
    return fig


def _render_shape(spec: FigureSpec):
    rows = _read_csv(os.path.join(spec.in_dir, "shape.csv"),
                     ["replica", "t", "theta", "reach"])
    summary = _read_summary(os.path.join(spec.in_dir, "shape_summary.json"))
    nu_hat = summary.get("fits", {}).get("nu_hat")
    fig = plt.figure(figsize=(7, 7))
    ax = fig.add_subplot(projection="polar")
    if not rows:
        _empty(ax, spec, "shape.csv has no replicas")
        return fig
    by_t = {}
    for r in rows:
        by_t.setdefault(float(r["t"]), {}).setdefault(float(r["theta"]), []).append(
            float(r["reach"]))
    for t, per_theta in sorted(by_t.items()):
        thetas = sorted(per_theta)
        means = [np.mean(per_theta[th]) / t for th in thetas]
        ax.plot(thetas + thetas[:1], means + means[:1], marker="o",
                label=f"mean reach/t at t={t:g}")
    if nu_hat:
        ring = np.linspace(0, 2 * math.pi, 128)
        ax.plot(ring, [1.0 / nu_hat] * len(ring), "--", color="k",
                label="1 / nu_hat")
    ax.set_title("directional growth speed")
    ax.legend(loc="lower left", bbox_to_anchor=(1.0, 0.0))
    return fig
