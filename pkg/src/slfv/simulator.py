"""Forward runs of the growth process to a stopping condition.

Two window policies:

* AdaptiveWindow — candidates on the inflated bounding box of the occupied
  region; exact in distribution for compact seeds.
* FixedWindow(Q) — the restricted process: only events centred in Q, balls
  clipped to Q. Required for unbounded seeds (the unrestricted half-plane
  process jumps at infinite rate); the default strip half-width for a run
  to distance x is A*sqrt(x) with A configurable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .errors import AcceptanceError, BudgetExceededError, InvalidWindowError
from .events import Event, EventLog, Window
from .kernel import GrowthEngine
from .measure import RadiusMeasure
from .occupancy import Disk, HalfPlane, OccupiedState, SeedRegion

DEFAULT_STRIP_A = 6.0
DEFAULT_BUDGET = 1_000_000_000


# ---------------------------------------------------------------------------
# stop conditions and window policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointCovered:
    z: tuple


@dataclass(frozen=True)
class HalfPlaneReached:
    x: float


@dataclass(frozen=True)
class SegmentCovered:
    z: tuple


@dataclass(frozen=True)
class TimeHorizon:
    t: float


@dataclass(frozen=True)
class EventCount:
    n: int


StopCondition = PointCovered | HalfPlaneReached | SegmentCovered | TimeHorizon | EventCount


@dataclass(frozen=True)
class AdaptiveWindow:
    """Inflate the occupied bounding box by R0 after every acceptance."""


@dataclass(frozen=True)
class FixedWindow:
    window: Window


WindowPolicy = AdaptiveWindow | FixedWindow


@dataclass
class StopReport:
    stop_time: float
    trigger_event_id: int | None
    n_events: int
    candidate_count: int
    truncation_flag: bool
    milestones: dict = field(default_factory=dict)


def default_strip_window(x: float, r0: float, strip_a: float = DEFAULT_STRIP_A) -> Window:
    """Strip window for a run to distance x: half-width A*sqrt(x), left margin 2*R0."""
    half = max(strip_a * math.sqrt(max(x, 1.0)), 3.0 * r0)
    return Window(-2.0 * r0, x + 2.0 * r0, -half, half)


def _stop_params(stop: StopCondition) -> dict:
    if isinstance(stop, PointCovered):
        return {"stop_kind": kernel.STOP_POINT, "track_point": tuple(stop.z)}
    if isinstance(stop, HalfPlaneReached):
        return {"stop_kind": kernel.STOP_HALFPLANE, "track_halfplane_x": float(stop.x)}
    if isinstance(stop, SegmentCovered):
        return {"stop_kind": kernel.STOP_SEGMENT, "track_segment": tuple(stop.z)}
    if isinstance(stop, TimeHorizon):
        return {"stop_kind": kernel.STOP_TIME, "stop_t": float(stop.t)}
    if isinstance(stop, EventCount):
        return {"stop_kind": kernel.STOP_COUNT, "stop_n": int(stop.n)}
    raise TypeError(f"unknown stop condition {stop!r}")


def _build_engine(seed: SeedRegion, m: RadiusMeasure, rng, stop: StopCondition,
                  window_policy: WindowPolicy, *, track: dict | None = None,
                  budget: int = DEFAULT_BUDGET, two_type: "TwoTypeRule | None" = None,
                  log_candidates: bool = False, prune: bool = True,
                  pause_times=()) -> GrowthEngine:
    params = _stop_params(stop)
    if track:
        for key in ("track_halfplane_x", "track_point", "track_segment"):
            if track.get(key) is not None:
                params.setdefault(key, track[key])
    window = window_policy.window if isinstance(window_policy, FixedWindow) else None
    tt = {}
    if two_type is not None:
        tt = {"two_type_rule": two_type.rule_code(), "two_type_center": two_type.center}
    return GrowthEngine(seed, m, rng, window=window, budget=budget,
                        log_candidates=log_candidates, prune=prune,
                        pause_times=pause_times, **params, **tt)


def _finish(engine: GrowthEngine, status: int, *, with_types: bool = False,
            seed_info: dict | None = None):
    times, cx, cy, radius = engine.log_arrays()
    log = EventLog(
        times=times, cx=cx, cy=cy, radius=radius,
        types=engine.btype[: engine.n_events].copy() if with_types else None,
        candidate_count=int(engine.regs_i[kernel.I_NCAND]),
        window=engine.window,
        seed_info=seed_info or {},
    )
    trigger = int(engine.regs_i[kernel.I_TRIGGER])
    report = StopReport(
        stop_time=float(engine.regs_f[kernel.F_TNOW]),
        trigger_event_id=trigger if trigger >= 0 else None,
        n_events=engine.n_events,
        candidate_count=log.candidate_count,
        truncation_flag=engine.truncated,
        milestones=engine.milestones(),
    )
    if status == kernel.ST_BUDGET:
        if engine.regs_i[kernel.I_NALIVE] == 0:
            msg = ("window saturated by the occupied region; "
                   "the stop condition is unreachable")
        else:
            msg = f"candidate budget exhausted after {log.candidate_count} candidates"
        raise BudgetExceededError(msg, log=log, report=report)
    # stop_time equals the trigger time when a trigger exists
    if report.trigger_event_id is not None:
        report.stop_time = float(times[report.trigger_event_id])
    return log, report


def run_forward(seed: SeedRegion, m: RadiusMeasure, rng: np.random.Generator,
                stop: StopCondition, window_policy: WindowPolicy = AdaptiveWindow(),
                *, track: dict | None = None, budget: int = DEFAULT_BUDGET,
                log_candidates: bool = False, prune: bool = True,
                seed_info: dict | None = None):
    """Run the jump process until `stop`; returns (EventLog, StopReport).

    `track` may request extra milestone times, e.g.
    {"track_halfplane_x": 50.0, "track_segment": (50.0, 0.0)}; they appear in
    StopReport.milestones regardless of the stop condition. With
    log_candidates=True the raw candidate stream is returned as a third
    element (rows t, x, y, r); prune=False additionally keeps redundant
    interior candidates in that stream.
    """
    engine = _build_engine(seed, m, rng, stop, window_policy, track=track,
                           budget=budget, log_candidates=log_candidates, prune=prune)
    status = engine.run()
    out = _finish(engine, status, seed_info=seed_info)
    if log_candidates:
        return out[0], out[1], engine.candidate_log()
    return out


def hitting_time(seed: SeedRegion, m: RadiusMeasure, rng: np.random.Generator,
                 target, window_policy: WindowPolicy = AdaptiveWindow(),
                 budget: int = DEFAULT_BUDGET) -> float:
    """First hitting time of a point, half-plane, or segment-coverage target."""
    if isinstance(target, (PointCovered, HalfPlaneReached, SegmentCovered)):
        stop = target
    elif isinstance(target, tuple):
        stop = PointCovered(target)
    elif isinstance(target, (int, float)):
        stop = HalfPlaneReached(float(target))
    else:
        raise TypeError(f"unsupported target {target!r}")
    _, report = run_forward(seed, m, rng, stop, window_policy, budget=budget)
    return report.stop_time


# ---------------------------------------------------------------------------
# two-type runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoTypeRule:
    """Seed typing rule: split by x sign, y sign, or k angular sectors."""

    kind: str = "x"  # "x" | "y" | "sectors"
    sectors: int = 2
    center: tuple = (0.0, 0.0)

    def rule_code(self) -> int:
        if self.kind == "x":
            return 0
        if self.kind == "y":
            return 1
        if self.kind == "sectors":
            if self.sectors < 2:
                raise ValueError("need at least 2 sectors")
            return int(self.sectors)
        raise ValueError(f"unknown rule {self.kind}")

    def seed_type(self, x: float, y: float) -> int:
        if self.kind == "x":
            return 0 if x < self.center[0] else 1
        if self.kind == "y":
            return 0 if y < self.center[1] else 1
        ang = math.atan2(y - self.center[1], x - self.center[0])
        sec = int((ang + math.pi) / (2.0 * math.pi) * self.sectors)
        return min(sec, self.sectors - 1)


def run_two_type(seed: SeedRegion, rule: TwoTypeRule, m: RadiusMeasure,
                 rng: np.random.Generator, stop: StopCondition,
                 window_policy: WindowPolicy = AdaptiveWindow(),
                 budget: int = DEFAULT_BUDGET):
    """Forward run with single-parent colouring.

    On each acceptance a parent location is drawn uniformly from the
    event/occupied intersection by rejection; the event inherits the type of
    the latest event covering that location (the seed rule types parents in
    the initial region). Whole ball takes the parent's type.
    """
    engine = _build_engine(seed, m, rng, stop, window_policy, budget=budget, two_type=rule)
    status = engine.run()
    return _finish(engine, status, with_types=True)


# ---------------------------------------------------------------------------
# scripted runs (explicit candidate list; used by tests and replay checks)
# ---------------------------------------------------------------------------

def run_scripted(seed: SeedRegion, m: RadiusMeasure, candidates, stop: StopCondition,
                 clip: Window | None = None):
    """Apply the acceptance rule to an explicit, time-ordered candidate list."""
    state = OccupiedState(seed, m.max_radius(), clip=clip)
    accepted: list[Event] = []
    milestones = {"halfplane": None, "point": None, "segment": None}

    def satisfied() -> bool:
        if isinstance(stop, HalfPlaneReached):
            if state.x_front >= stop.x:
                milestones["halfplane"] = milestones["halfplane"] or state.t_now
                return True
        elif isinstance(stop, PointCovered):
            if state.covers(*stop.z):
                milestones["point"] = milestones["point"] or state.t_now
                return True
        elif isinstance(stop, SegmentCovered):
            if state.segment_fully_covered(*stop.z):
                milestones["segment"] = milestones["segment"] or state.t_now
                return True
        elif isinstance(stop, EventCount):
            return len(accepted) >= stop.n
        return False

    trigger = None
    stop_time = 0.0
    if not satisfied():
        for e in candidates:
            if isinstance(stop, TimeHorizon) and e.time > stop.t:
                stop_time = stop.t
                break
            if not state.intersects(e.cx, e.cy, e.radius):
                continue
            e = Event(len(accepted), e.time, e.cx, e.cy, e.radius)
            state.insert(e)
            accepted.append(e)
            stop_time = e.time
            if satisfied():
                trigger = e.id
                break
        else:
            if isinstance(stop, TimeHorizon):
                stop_time = stop.t

    log = EventLog.from_events(accepted)
    log.candidate_count = len(candidates) if hasattr(candidates, "__len__") else -1
    report = StopReport(
        stop_time=stop_time, trigger_event_id=trigger, n_events=len(accepted),
        candidate_count=log.candidate_count, truncation_flag=False,
        milestones=milestones)
    return log, report, state


# ---------------------------------------------------------------------------
# window convergence diagnostic
# ---------------------------------------------------------------------------

def window_convergence(x: float, windows: list[Window], reps: int,
                       m: RadiusMeasure, master_seed: int,
                       seed_region: SeedRegion | None = None,
                       budget: int = DEFAULT_BUDGET) -> dict:
    """Mean hitting time of (x, 0) from the half-plane under growing windows.

    Windows must not shrink; reports per-window means and the difference
    between the two largest windows in units of the pooled standard error.
    """
    from .events import replica_stream

    if len(windows) < 2:
        raise InvalidWindowError("need at least two windows to compare")
    areas = [w.area for w in windows]
    if any(a2 < a1 for a1, a2 in zip(areas, areas[1:])):
        raise InvalidWindowError("windows must be non-decreasing in area")
    seed_region = seed_region if seed_region is not None else HalfPlane(0.0)
    rows = []
    for wi, w in enumerate(windows):
        taus = []
        for rep in range(reps):
            rng = replica_stream(master_seed, wi * reps + rep)
            _, report = run_forward(seed_region, m, rng, PointCovered((x, 0.0)),
                                    FixedWindow(w), budget=budget)
            taus.append(report.stop_time)
        taus = np.asarray(taus)
        rows.append({
            "window": (w.x_lo, w.x_hi, w.y_lo, w.y_hi),
            "mean_tau": float(taus.mean()),
            "se_tau": float(taus.std(ddof=1) / math.sqrt(len(taus))),
            "reps": reps,
        })
    d = abs(rows[-1]["mean_tau"] - rows[-2]["mean_tau"])
    pooled = math.hypot(rows[-1]["se_tau"], rows[-2]["se_tau"])
    return {
        "x": x,
        "per_window": rows,
        "largest_pair_diff": d,
        "largest_pair_pooled_se": pooled,
        "stable": bool(d <= 2.0 * pooled),
    }


# ---------------------------------------------------------------------------
# fast read-only state reconstruction from logs
# ---------------------------------------------------------------------------

def state_from_log(seed: SeedRegion, m: RadiusMeasure, log: EventLog,
                   clip: Window | None = None, upto: int | None = None) -> OccupiedState:
    """Bulk-load a finished log into a queryable state (no acceptance checks)."""
    st = OccupiedState(seed, m.max_radius(), clip=clip)
    n = len(log) if upto is None else upto
    for i in range(n):
        idx = len(st.balls)
        st.balls.append((i, float(log.cx[i]), float(log.cy[i]), float(log.radius[i])))
        st.grid.setdefault(st._cell_of(float(log.cx[i]), float(log.cy[i])), []).append(idx)
    if n:
        x0 = float(np.min(log.cx[:n] - log.radius[:n]))
        x1 = float(np.max(log.cx[:n] + log.radius[:n]))
        y0 = float(np.min(log.cy[:n] - log.radius[:n]))
        y1 = float(np.max(log.cy[:n] + log.radius[:n]))
        if clip is not None:
            x0, x1 = max(x0, clip.x_lo), min(x1, clip.x_hi)
            y0, y1 = max(y0, clip.y_lo), min(y1, clip.y_hi)
        st.bbox = [min(st.bbox[0], x0), max(st.bbox[1], x1),
                   min(st.bbox[2], y0), max(st.bbox[3], y1)]
        st.t_now = float(log.times[n - 1])
    return st
