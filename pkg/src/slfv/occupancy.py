"""Occupied region S_t: seed region plus a growing union of closed balls.

All geometry is exact closed-set arithmetic with no tolerances (boundaries
have probability zero). A spatial hash with cell size 2*R0 answers ball
queries from the 3x3 cell neighbourhood only. In restricted mode every
stored ball is clipped to the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AcceptanceError
from .events import Event, EventLog, Window


# ---------------------------------------------------------------------------
# seed regions
# ---------------------------------------------------------------------------

def _ball_rect_intersects(cx, cy, r, x0, x1, y0, y1) -> bool:
    if x0 > x1 or y0 > y1:
        return False
    dx = max(x0 - cx, 0.0, cx - x1)
    dy = max(y0 - cy, 0.0, cy - y1)
    return dx * dx + dy * dy <= r * r


def _lens_rect_intersects(c1, r1, c2, r2, w: Window) -> bool:
    """Exact test: does B(c1,r1) & B(c2,r2) meet the rectangle w?"""
    d = math.hypot(c2[0] - c1[0], c2[1] - c1[1])
    if d > r1 + r2:
        return False
    # witness inside the lens: centre of the smaller disk if nested, else the
    # mid-overlap point on the centre segment
    if d <= abs(r1 - r2):
        wx, wy = (c1 if r1 <= r2 else c2)
    elif d == 0.0:
        wx, wy = c1
    else:
        s = (r1 + (d - r2)) / 2.0  # distance from c1 along the segment
        wx = c1[0] + (c2[0] - c1[0]) * s / d
        wy = c1[1] + (c2[1] - c1[1]) * s / d
    if w.contains(wx, wy):
        return True
    # the lens is connected: if it meets w but the witness is outside, some
    # boundary edge of w crosses the lens
    edges = [
        ((w.x_lo, w.y_lo), (w.x_hi, w.y_lo)),
        ((w.x_lo, w.y_hi), (w.x_hi, w.y_hi)),
        ((w.x_lo, w.y_lo), (w.x_lo, w.y_hi)),
        ((w.x_hi, w.y_lo), (w.x_hi, w.y_hi)),
    ]
    for (ax, ay), (bx, by) in edges:
        iv1 = _segment_disk_interval(ax, ay, bx, by, c1[0], c1[1], r1)
        if iv1 is None:
            continue
        iv2 = _segment_disk_interval(ax, ay, bx, by, c2[0], c2[1], r2)
        if iv2 is None:
            continue
        if max(iv1[0], iv2[0]) <= min(iv1[1], iv2[1]):
            return True
    return False


def _segment_disk_interval(ax, ay, bx, by, cx, cy, r):
    """Parameter interval of segment a->b inside B(c, r), or None."""
    ux, uy = bx - ax, by - ay
    ln = math.hypot(ux, uy)
    ux, uy = ux / ln, uy / ln
    px, py = cx - ax, cy - ay
    s_mid = px * ux + py * uy
    d2 = (px - s_mid * ux) ** 2 + (py - s_mid * uy) ** 2
    if d2 > r * r:
        return None
    half = math.sqrt(max(r * r - d2, 0.0))
    lo, hi = max(s_mid - half, 0.0), min(s_mid + half, ln)
    if lo > hi:
        return None
    return (lo, hi)


class SeedRegion:
    """Closed initial region with exact membership and ball-hit tests."""

    satisfies_triangle = False

    def covers(self, x: float, y: float) -> bool:
        raise NotImplementedError

    def ball_intersects(self, cx: float, cy: float, r: float, clip: Window | None = None) -> bool:
        raise NotImplementedError

    def bbox(self):
        """(x0, x1, y0, y1), possibly infinite."""
        raise NotImplementedError

    def x_extent(self) -> float:
        return self.bbox()[1]

    def contact_point(self, cx: float, cy: float):
        """A point of the region closest to (cx, cy); chain anchors use it."""
        raise NotImplementedError

    def segment_interval(self, zx: float, zy: float):
        """Closed parameter interval of segment 0->z covered by the seed."""
        raise NotImplementedError


@dataclass(frozen=True)
class PointSet(SeedRegion):
    points: tuple

    satisfies_triangle = False  # null Lebesgue measure

    def covers(self, x, y):
        return any(px == x and py == y for px, py in self.points)

    def ball_intersects(self, cx, cy, r, clip=None):
        for px, py in self.points:
            if clip is not None and not clip.contains(px, py):
                continue
            if (px - cx) ** 2 + (py - cy) ** 2 <= r * r:
                return True
        return False

    def bbox(self):
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return (min(xs), max(xs), min(ys), max(ys))

    def contact_point(self, cx, cy):
        return min(self.points, key=lambda p: (p[0] - cx) ** 2 + (p[1] - cy) ** 2)

    def segment_interval(self, zx, zy):
        ln = math.hypot(zx, zy)
        ivs = []
        for px, py in self.points:
            s = (px * zx + py * zy) / ln
            if 0.0 <= s <= ln and px * zy - py * zx == 0.0:
                ivs.append((s, s))
        return ivs


@dataclass(frozen=True)
class HalfPlane(SeedRegion):
    """The closed half-plane x <= x0."""

    x0: float = 0.0

    satisfies_triangle = True

    def covers(self, x, y):
        return x <= self.x0

    def ball_intersects(self, cx, cy, r, clip=None):
        if clip is not None:
            return _ball_rect_intersects(cx, cy, r, clip.x_lo, min(self.x0, clip.x_hi), clip.y_lo, clip.y_hi)
        return cx - r <= self.x0

    def bbox(self):
        return (-math.inf, self.x0, -math.inf, math.inf)

    def contact_point(self, cx, cy):
        return (min(cx, self.x0), cy)

    def segment_interval(self, zx, zy):
        # points s*(zx,zy)/|z| with s*zx/|z| <= x0
        ln = math.hypot(zx, zy)
        ux = zx / ln
        if ux > 0:
            hi = self.x0 / ux
            return [(0.0, min(hi, ln))] if hi >= 0.0 else []
        if ux < 0:
            lo = self.x0 / ux
            return [(max(lo, 0.0), ln)] if lo <= ln else []
        return [(0.0, ln)] if self.x0 >= 0.0 else []


@dataclass(frozen=True)
class Disk(SeedRegion):
    cx: float
    cy: float
    r: float

    satisfies_triangle = True

    def covers(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r**2

    def ball_intersects(self, cx, cy, r, clip=None):
        if clip is None:
            return (cx - self.cx) ** 2 + (cy - self.cy) ** 2 <= (r + self.r) ** 2
        return _lens_rect_intersects((cx, cy), r, (self.cx, self.cy), self.r, clip)

    def bbox(self):
        return (self.cx - self.r, self.cx + self.r, self.cy - self.r, self.cy + self.r)

    def contact_point(self, cx, cy):
        d = math.hypot(cx - self.cx, cy - self.cy)
        if d <= self.r or d == 0.0:
            return (cx, cy) if d <= self.r else (self.cx, self.cy)
        t = self.r / d
        return (self.cx + (cx - self.cx) * t, self.cy + (cy - self.cy) * t)

    def segment_interval(self, zx, zy):
        iv = _segment_disk_interval(0.0, 0.0, zx, zy, self.cx, self.cy, self.r)
        return [iv] if iv is not None else []


@dataclass(frozen=True)
class SeedUnion(SeedRegion):
    parts: tuple

    @property
    def satisfies_triangle(self):
        return all(p.satisfies_triangle for p in self.parts)

    def covers(self, x, y):
        return any(p.covers(x, y) for p in self.parts)

    def ball_intersects(self, cx, cy, r, clip=None):
        return any(p.ball_intersects(cx, cy, r, clip) for p in self.parts)

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def contact_point(self, cx, cy):
        pts = [p.contact_point(cx, cy) for p in self.parts]
        return min(pts, key=lambda p: (p[0] - cx) ** 2 + (p[1] - cy) ** 2)

    def segment_interval(self, zx, zy):
        out = []
        for p in self.parts:
            out.extend(p.segment_interval(zx, zy))
        return out


def origin_seed() -> PointSet:
    return PointSet(points=((0.0, 0.0),))


# ---------------------------------------------------------------------------
# occupied state
# ---------------------------------------------------------------------------

def merge_intervals(ivs):
    """Union of closed intervals; touching endpoints merge."""
    ivs = sorted(ivs)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


class OccupiedState:
    """Reference implementation of S_t, mutated by insert() only.

    Kept deliberately simple; the high-throughput path lives in the kernel
    module and is cross-checked against this one by log replay.
    """

    def __init__(self, seed: SeedRegion, r0: float, clip: Window | None = None):
        self.seed = seed
        self.r0 = float(r0)
        self.clip = clip
        self.cell = 2.0 * self.r0
        self.balls: list[tuple] = []  # (event_id, cx, cy, r)
        self.grid: dict[tuple, list] = {}
        self.t_now = 0.0
        sx0, sx1, sy0, sy1 = seed.bbox()
        if clip is not None:
            sx0, sx1 = max(sx0, clip.x_lo), min(sx1, clip.x_hi)
            sy0, sy1 = max(sy0, clip.y_lo), min(sy1, clip.y_hi)
        self.bbox = [sx0, sx1, sy0, sy1]

    def _cell_of(self, x, y):
        return (math.floor(x / self.cell), math.floor(y / self.cell))

    def _neighbours(self, x, y):
        ix, iy = self._cell_of(x, y)
        for jx in range(ix - 1, ix + 2):
            for jy in range(iy - 1, iy + 2):
                yield from self.grid.get((jx, jy), ())

    def intersects(self, cx: float, cy: float, r: float) -> bool:
        """Does B((cx,cy), r) meet the occupied region (clip applied)?"""
        for i in self._neighbours(cx, cy):
            _, bx, by, br = self.balls[i]
            if (bx - cx) ** 2 + (by - cy) ** 2 <= (r + br) ** 2:
                if self.clip is None or _lens_rect_intersects((cx, cy), r, (bx, by), br, self.clip):
                    return True
        return self.seed.ball_intersects(cx, cy, r, self.clip)

    def intersects_bruteforce(self, cx, cy, r) -> bool:
        for _, bx, by, br in self.balls:
            if (bx - cx) ** 2 + (by - cy) ** 2 <= (r + br) ** 2:
                if self.clip is None or _lens_rect_intersects((cx, cy), r, (bx, by), br, self.clip):
                    return True
        return self.seed.ball_intersects(cx, cy, r, self.clip)

    def covers(self, x: float, y: float) -> bool:
        if self.clip is not None and not self.clip.contains(x, y):
            return False
        if self.seed.covers(x, y):
            return True
        for i in self._neighbours(x, y):
            _, bx, by, br = self.balls[i]
            if (bx - x) ** 2 + (by - y) ** 2 <= br * br:
                return True
        return False

    def covers_bruteforce(self, x, y) -> bool:
        if self.clip is not None and not self.clip.contains(x, y):
            return False
        if self.seed.covers(x, y):
            return True
        return any((bx - x) ** 2 + (by - y) ** 2 <= br * br for _, bx, by, br in self.balls)

    def covering_events(self, x: float, y: float) -> list:
        """Ids of all balls covering the point, ascending in time."""
        if self.clip is not None and not self.clip.contains(x, y):
            return []
        ids = [
            self.balls[i][0]
            for i in self._neighbours(x, y)
            if (self.balls[i][1] - x) ** 2 + (self.balls[i][2] - y) ** 2 <= self.balls[i][3] ** 2
        ]
        return sorted(ids)

    def insert(self, e: Event) -> None:
        if e.time <= self.t_now and self.balls:
            raise AcceptanceError(f"event time {e.time} not past t_now {self.t_now}")
        if not self.intersects(e.cx, e.cy, e.radius):
            raise AcceptanceError(f"event {e.id} does not intersect the occupied region")
        idx = len(self.balls)
        self.balls.append((e.id, e.cx, e.cy, e.radius))
        self.grid.setdefault(self._cell_of(e.cx, e.cy), []).append(idx)
        x0, x1 = e.cx - e.radius, e.cx + e.radius
        y0, y1 = e.cy - e.radius, e.cy + e.radius
        if self.clip is not None:
            x0, x1 = max(x0, self.clip.x_lo), min(x1, self.clip.x_hi)
            y0, y1 = max(y0, self.clip.y_lo), min(y1, self.clip.y_hi)
        self.bbox = [
            min(self.bbox[0], x0),
            max(self.bbox[1], x1),
            min(self.bbox[2], y0),
            max(self.bbox[3], y1),
        ]
        self.t_now = e.time

    def segment_intervals(self, zx: float, zy: float):
        """Merged closed chord intervals of segment 0->z, in arc length."""
        ivs = list(self.seed.segment_interval(zx, zy))
        # segments are assumed inside the window, so clipping never trims chords
        for _, bx, by, br in self.balls:
            iv = _segment_disk_interval(0.0, 0.0, zx, zy, bx, by, br)
            if iv is not None:
                ivs.append(iv)
        return merge_intervals(ivs)

    def segment_fully_covered(self, zx: float, zy: float) -> bool:
        """Exact interval-union test for the segment from the origin to z."""
        ln = math.hypot(zx, zy)
        ivs = self.segment_intervals(zx, zy)
        return bool(ivs) and ivs[0][0] <= 0.0 and ivs[0][1] >= ln

    def inflated_bbox(self, margin: float) -> Window:
        if margin < self.r0:
            raise ValueError(f"margin {margin} below the max radius {self.r0}")
        x0, x1, y0, y1 = self.bbox
        return Window(x0 - margin, x1 + margin, y0 - margin, y1 + margin)

    @property
    def x_front(self) -> float:
        return self.bbox[1]


def replay_log(seed: SeedRegion, r0: float, log: EventLog, clip: Window | None = None) -> OccupiedState:
    """Re-apply the acceptance predicate to a finished log.

    Raises AcceptanceError if any logged event fails against its prefix
    state; returns the final state otherwise.
    """
    st = OccupiedState(seed, r0, clip=clip)
    for e in log:
        st.insert(e)
    return st
