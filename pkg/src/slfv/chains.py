"""Backward structures over a finished event log.

A chain is a time-increasing sequence of events whose consecutive balls
intersect. The ancestral skeleton is the backward closure of everything an
observation point can trace through; a geodesic is a chain from the seed
whose final ball meets the stop target exactly at the hitting time (all
geodesics share that final ball, so endpoint quantities are unambiguous).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChainNotFoundError
from .events import EventLog
from .measure import SlowChainParams
from .occupancy import SeedRegion

SEED_LINK_ID = -1


@dataclass(frozen=True)
class ChainLink:
    """One ball of a chain; event_id is SEED_LINK_ID for the seed anchor."""

    time: float
    cx: float
    cy: float
    radius: float
    event_id: int = SEED_LINK_ID

    @property
    def is_seed(self) -> bool:
        return self.event_id == SEED_LINK_ID


@dataclass
class Chain:
    links: list
    kind: str = "generic"  # geodesic | slow | generic

    def validate(self, seed: SeedRegion | None = None, r0: float | None = None) -> None:
        """Check strict time increase and consecutive ball intersection."""
        ts = [l.time for l in self.links]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("chain times are not strictly increasing")
        for a, b in zip(self.links, self.links[1:]):
            d2 = (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2
            if d2 > (a.radius + b.radius) ** 2:
                raise ValueError(f"consecutive balls {a.event_id}->{b.event_id} do not intersect")
        if r0 is not None and any(not (0.0 <= l.radius <= r0) for l in self.links):
            raise ValueError("link radius outside [0, R0]")
        if seed is not None and self.links:
            first = self.links[0]
            if not first.is_seed and not seed.ball_intersects(first.cx, first.cy, first.radius):
                raise ValueError("first link does not meet the seed region")


@dataclass(frozen=True)
class ChainStats:
    n: int
    y_end: float
    max_abs_y: float
    strip_radius: float
    x_advance_total: float
    x_advance_max: float


@dataclass
class SlowChain:
    params: SlowChainParams
    waits: np.ndarray
    total: float
    exact_law: bool = True

    @property
    def steps(self) -> int:
        return len(self.waits)


class _LogGrid:
    """Static spatial hash over a finished log, cell size 2*R0."""

    def __init__(self, log: EventLog, r0: float):
        self.log = log
        self.cell = 2.0 * r0
        self.grid: dict[tuple, list] = {}
        for i in range(len(log)):
            key = (math.floor(log.cx[i] / self.cell), math.floor(log.cy[i] / self.cell))
            self.grid.setdefault(key, []).append(i)

    def intersecting(self, cx: float, cy: float, r: float) -> list:
        """Indices of log balls intersecting B((cx,cy), r)."""
        ix = math.floor(cx / self.cell)
        iy = math.floor(cy / self.cell)
        out = []
        log = self.log
        for jx in range(ix - 1, ix + 2):
            for jy in range(iy - 1, iy + 2):
                for i in self.grid.get((jx, jy), ()):
                    if (log.cx[i] - cx) ** 2 + (log.cy[i] - cy) ** 2 <= (log.radius[i] + r) ** 2:
                        out.append(i)
        return out


def ancestral_skeleton(log: EventLog, z: tuple, t: float, s: float) -> list[ChainLink]:
    """Backward closure from z at time t, run for duration s.

    Starts from the point z (radius 0) together with any logged ball at time
    exactly t covering z, then repeatedly adds logged events in (t-s, t),
    processed in decreasing time order, whose ball meets the current union.
    """
    if s < 0 or s > t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    zx, zy = z
    links = [ChainLink(t, zx, zy, 0.0, SEED_LINK_ID)]
    n = len(log)
    for i in range(n):
        if log.times[i] == t and (log.cx[i] - zx) ** 2 + (log.cy[i] - zy) ** 2 <= log.radius[i] ** 2:
            links.append(_link(log, i))
    grid_cell = None
    active: dict[tuple, list] = {}

    def _add_active(link: ChainLink):
        key = (math.floor(link.cx / grid_cell), math.floor(link.cy / grid_cell))
        active.setdefault(key, []).append(link)

    def _hits_active(cx, cy, r) -> bool:
        ix = math.floor(cx / grid_cell)
        iy = math.floor(cy / grid_cell)
        for jx in range(ix - 1, ix + 2):
            for jy in range(iy - 1, iy + 2):
                for l in active.get((jx, jy), ()):
                    if (l.cx - cx) ** 2 + (l.cy - cy) ** 2 <= (l.radius + r) ** 2:
                        return True
        return False

    r0 = float(np.max(log.radius)) if n else 1.0
    grid_cell = 2.0 * max(r0, 1e-9)
    for l in links:
        _add_active(l)
    order = np.argsort(log.times, kind="stable")[::-1]
    for i in order:
        ti = float(log.times[i])
        if not (t - s < ti < t):
            continue
        if _hits_active(float(log.cx[i]), float(log.cy[i]), float(log.radius[i])):
            link = _link(log, i)
            links.append(link)
            _add_active(link)
    return links


def _link(log: EventLog, i: int) -> ChainLink:
    return ChainLink(float(log.times[i]), float(log.cx[i]), float(log.cy[i]),
                     float(log.radius[i]), int(i))


def skeleton_meets_seed(links: list[ChainLink], seed: SeedRegion) -> bool:
    """Does the skeleton's ball union intersect the seed region?"""
    for l in links:
        if l.radius == 0.0:
            if seed.covers(l.cx, l.cy):
                return True
        elif seed.ball_intersects(l.cx, l.cy, l.radius):
            return True
    return False


def extract_geodesic(log: EventLog, trigger_event: int, rng: np.random.Generator,
                     seed: SeedRegion) -> Chain:
    """Backward-uniform geodesic from the stop trigger to the seed.

    At each step the walk picks uniformly among the earlier logged events
    whose ball intersects the current ball, plus the seed region when the
    current ball meets it; stepping to the seed terminates. Reversed, the
    walk is a valid chain from the seed whose final ball is the trigger
    ball, i.e. it meets the target exactly at the recorded hitting time.
    """
    n = len(log)
    if not (0 <= trigger_event < n):
        raise ChainNotFoundError(f"trigger event {trigger_event} not in log of size {n}")
    grid = _LogGrid(log, float(np.max(log.radius)))
    rev: list[int] = [trigger_event]
    cur = trigger_event
    while True:
        cx, cy, r = float(log.cx[cur]), float(log.cy[cur]), float(log.radius[cur])
        choices = [j for j in grid.intersecting(cx, cy, r) if log.times[j] < log.times[cur]]
        if seed.ball_intersects(cx, cy, r):
            choices.append(SEED_LINK_ID)
        if not choices:
            raise ChainNotFoundError(
                f"event {cur} has no predecessor; log is not replayable")
        pick = choices[int(rng.integers(0, len(choices)))]
        if pick == SEED_LINK_ID:
            break
        rev.append(pick)
        cur = pick
    first = rev[-1]
    wx, wy = seed.contact_point(float(log.cx[first]), float(log.cy[first]))
    links = [ChainLink(0.0, float(wx), float(wy), 0.0, SEED_LINK_ID)]
    links.extend(_link(log, i) for i in reversed(rev))
    return Chain(links=links, kind="geodesic")


def chain_stats(c: Chain) -> ChainStats:
    """Jump count, endpoint displacement, strip radius, per-jump advance."""
    links = c.links
    non_seed = [l for l in links if not l.is_seed]
    n = len(non_seed)
    y_end = links[-1].cy if links else 0.0
    max_abs_y = max((abs(l.cy) for l in non_seed), default=abs(links[0].cy) if links else 0.0)
    strip_radius = max((abs(l.cy) + l.radius for l in links), default=0.0)
    front = links[0].cx + links[0].radius if links else 0.0
    adv_total = 0.0
    adv_max = 0.0
    for l in links[1:]:
        f = l.cx + l.radius
        if f > front:
            adv = f - front
            adv_total += adv
            adv_max = max(adv_max, adv)
            front = f
    return ChainStats(n=n, y_end=float(y_end), max_abs_y=float(max_abs_y),
                      strip_radius=float(strip_radius),
                      x_advance_total=float(adv_total), x_advance_max=float(adv_max))


def sample_slow_chain(params: SlowChainParams, x: float, rng: np.random.Generator) -> SlowChain:
    """Analytic draw of the slow coverage chain to distance x.

    ceil(x / delta) independent exponential waits at the exact step rate
    2*delta^2*mu((3*delta, oo)); their sum stochastically dominates the bulk
    coverage time of every point within delta of (x, 0).
    """
    steps = max(int(math.ceil(x / params.delta)), 0) if x > 0 else 0
    waits = rng.standard_exponential(steps) / params.step_rate
    exact = math.isclose(params.step_rate, 2.0 * params.delta**2 * params.eta)
    return SlowChain(params=params, waits=waits, total=float(waits.sum()), exact_law=exact)


def slow_chain_from_candidates(cands: np.ndarray, params: SlowChainParams, x: float) -> SlowChain | None:
    """Scan a raw candidate stream (t, x, y, r rows) for the slow chain.

    Step j waits for the first event after step j-1 with radius > 3*delta
    centred in (x_{j-1}, x_j) x (-delta, delta). Returns None if the stream
    ends before the chain completes.
    """
    delta = params.delta
    steps = max(int(math.ceil(x / delta)), 0) if x > 0 else 0
    waits = []
    t_prev = 0.0
    i = 0
    n = len(cands)
    for j in range(1, steps + 1):
        x_lo, x_hi = (j - 1) * delta, j * delta
        while i < n:
            t, ex, ey, er = cands[i]
            i += 1
            if t > t_prev and er > 3.0 * delta and x_lo < ex < x_hi and -delta < ey < delta:
                waits.append(t - t_prev)
                t_prev = t
                break
        else:
            return None
    waits = np.asarray(waits)
    return SlowChain(params=params, waits=waits, total=float(t_prev), exact_law=True)
