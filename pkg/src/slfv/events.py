"""Poisson candidate generation and the accepted-event log.

Candidates are realised by superposition and thinning: exponential waiting
times at rate area * total_mass, centres uniform on the window, radii from
the normalised measure. One rng stream per replica keeps runs reproducible.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidWindowError
from .measure import RadiusMeasure

EVENTS_CSV_HEADER = ["id", "time", "cx", "cy", "radius"]


@dataclass(frozen=True)
class Event:
    """One accepted reproduction event: the closed ball B(center, radius)."""

    id: int
    time: float
    cx: float
    cy: float
    radius: float

    @property
    def center(self) -> tuple:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle used for candidate generation / restriction."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise InvalidWindowError(f"degenerate window {self}")

    @property
    def area(self) -> float:
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def contains(self, x: float, y: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi

    def snapped(self, h: float) -> "Window":
        """Expand outward so every edge lies on the lattice of pitch h."""
        import math

        return Window(
            math.floor(self.x_lo / h) * h,
            math.ceil(self.x_hi / h) * h,
            math.floor(self.y_lo / h) * h,
            math.ceil(self.y_hi / h) * h,
        )


@dataclass
class EventLog:
    """Accepted events in time order, as flat arrays.

    Only events that can change the occupied set are generated and logged;
    candidates whose ball provably lies inside the already-occupied region
    are excluded at the source, which leaves the set-valued process exact
    (such events are fixed points of the transition).
    """

    times: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    radius: np.ndarray
    types: np.ndarray | None = None
    candidate_count: int = 0
    window: Window | None = None
    seed_info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def event(self, i: int) -> Event:
        return Event(i, float(self.times[i]), float(self.cx[i]), float(self.cy[i]), float(self.radius[i]))

    def __iter__(self):
        return (self.event(i) for i in range(len(self)))

    def validate_monotone(self) -> None:
        if len(self) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("event times are not strictly increasing")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            header = list(EVENTS_CSV_HEADER)
            if self.types is not None:
                header.append("type")
            w.writerow(header)
            for i in range(len(self)):
                row = [i, repr(float(self.times[i])), repr(float(self.cx[i])),
                       repr(float(self.cy[i])), repr(float(self.radius[i]))]
                if self.types is not None:
                    row.append(int(self.types[i]))
                w.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "EventLog":
        times, cx, cy, radius, types = [], [], [], [], []
        with open(path, newline="") as f:
            r = csv.DictReader(f)
            has_type = r.fieldnames is not None and "type" in r.fieldnames
            for row in r:
                times.append(float(row["time"]))
                cx.append(float(row["cx"]))
                cy.append(float(row["cy"]))
                radius.append(float(row["radius"]))
                if has_type:
                    types.append(int(row["type"]))
        return cls(
            times=np.asarray(times),
            cx=np.asarray(cx),
            cy=np.asarray(cy),
            radius=np.asarray(radius),
            types=np.asarray(types, dtype=np.int8) if types else None,
        )

    @classmethod
    def from_events(cls, events) -> "EventLog":
        events = list(events)
        return cls(
            times=np.asarray([e.time for e in events], dtype=np.float64),
            cx=np.asarray([e.cx for e in events], dtype=np.float64),
            cy=np.asarray([e.cy for e in events], dtype=np.float64),
            radius=np.asarray([e.radius for e in events], dtype=np.float64),
        )


def replica_stream(master_seed: int, replica_id: int) -> np.random.Generator:
    """Independent, reproducible stream for one replica.

    Streams for different (master_seed, replica_id) pairs are statistically
    independent; the same pair always yields the same stream.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=(replica_id,)))


def next_candidate(rng: np.random.Generator, w: Window, m: RadiusMeasure, t_now: float) -> Event:
    """Draw the next Poisson candidate after t_now on the window w."""
    rate = w.area * m.total_mass
    t = t_now + rng.standard_exponential() / rate
    x = w.x_lo + (w.x_hi - w.x_lo) * rng.random()
    y = w.y_lo + (w.y_hi - w.y_lo) * rng.random()
    r = m.sample_radius(rng)
    return Event(id=-1, time=t, cx=x, cy=y, radius=r)
