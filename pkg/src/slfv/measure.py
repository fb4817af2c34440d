"""Reproduction-radius intensity measure and its derived constants.

The measure mu lives on (0, R0] and is represented exactly as a finite list
of atoms plus finitely many uniform densities, so tail masses, the Yule-rate
bound and sampling are all closed-form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMeasureError, NoValidDeltaError

DELTA_GRID_POINTS = 1000


@dataclass(frozen=True)
class RadiusMeasure:
    """Finite measure mu(dr) on (0, R0]: atoms plus uniform pieces.

    atoms: (radius, mass) pairs with radius > 0 and mass >= 0.
    uniform_pieces: (lo, hi, mass) with 0 <= lo < hi; the piece spreads
    `mass` uniformly over (lo, hi].
    """

    atoms: tuple = ()
    uniform_pieces: tuple = ()
    r0: float = field(init=False)
    total_mass: float = field(init=False)
    m0: float = field(init=False)

    def __post_init__(self):
        atoms = tuple((float(r), float(m)) for r, m in self.atoms)
        pieces = tuple((float(lo), float(hi), float(m)) for lo, hi, m in self.uniform_pieces)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "uniform_pieces", pieces)
        for r, m in atoms:
            if not (r > 0.0) or not math.isfinite(r):
                raise InvalidMeasureError(f"atom radius must be positive and finite, got {r}")
            if m < 0.0 or not math.isfinite(m):
                raise InvalidMeasureError(f"atom mass must be finite and >= 0, got {m}")
        for lo, hi, m in pieces:
            if lo < 0.0 or not lo < hi or not math.isfinite(hi):
                raise InvalidMeasureError(f"uniform piece needs 0 <= lo < hi < inf, got ({lo}, {hi})")
            if m < 0.0 or not math.isfinite(m):
                raise InvalidMeasureError(f"piece mass must be finite and >= 0, got {m}")
        total = sum(m for _, m in atoms) + sum(m for _, _, m in pieces)
        if total <= 0.0:
            raise InvalidMeasureError("measure has no mass")
        supports = [r for r, m in atoms if m > 0.0] + [hi for _, hi, m in pieces if m > 0.0]
        r0 = max(supports)
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "total_mass", total)
        object.__setattr__(self, "m0", self._yule_rate_bound(r0))

    def _yule_rate_bound(self, r0: float) -> float:
        # integral of pi*(R0 + r)^2 mu(dr); closed form per component
        acc = 0.0
        for r, m in self.atoms:
            acc += m * math.pi * (r0 + r) ** 2
        for lo, hi, m in self.uniform_pieces:
            acc += m * math.pi * ((r0 + hi) ** 3 - (r0 + lo) ** 3) / (3.0 * (hi - lo))
        return acc

    def max_radius(self) -> float:
        """R0, the supremum of the support."""
        return self.r0

    def yule_rate_bound(self) -> float:
        """Upper bound on the rate at which one existing ball is hit."""
        return self.m0

    def tail_mass(self, a: float) -> float:
        """mu((a, oo)); non-increasing in a, equal to total_mass at a <= 0."""
        acc = 0.0
        for r, m in self.atoms:
            if r > a:
                acc += m
        for lo, hi, m in self.uniform_pieces:
            if hi > a:
                acc += m * (hi - max(lo, a)) / (hi - lo)
        return acc

    def sample_radius(self, rng: np.random.Generator) -> float:
        """One radius drawn from mu normalised to a probability measure."""
        return float(self.sample_radii(rng, 1)[0])

    def sample_radii(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cum, kind, a, b = self.sampling_tables()
        u = rng.random(n) * self.total_mass
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(cum) - 1)
        out = a[idx].copy()
        piece = kind[idx] == 1
        if piece.any():
            out[piece] += (b[idx][piece] - a[idx][piece]) * rng.random(int(piece.sum()))
        return out

    def sampling_tables(self):
        """Flat arrays (cum_mass, kind, a, b) used by the simulation kernel."""
        cum, kind, a, b = [], [], [], []
        acc = 0.0
        for r, m in self.atoms:
            if m <= 0.0:
                continue
            acc += m
            cum.append(acc)
            kind.append(0)
            a.append(r)
            b.append(r)
        for lo, hi, m in self.uniform_pieces:
            if m <= 0.0:
                continue
            acc += m
            cum.append(acc)
            kind.append(1)
            a.append(lo)
            b.append(hi)
        return (
            np.asarray(cum, dtype=np.float64),
            np.asarray(kind, dtype=np.uint8),
            np.asarray(a, dtype=np.float64),
            np.asarray(b, dtype=np.float64),
        )

    def to_json_dict(self) -> dict:
        return {
            "atoms": [{"r": r, "mass": m} for r, m in self.atoms],
            "uniform": [{"lo": lo, "hi": hi, "mass": m} for lo, hi, m in self.uniform_pieces],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RadiusMeasure":
        atoms = tuple((e["r"], e["mass"]) for e in d.get("atoms", []))
        pieces = tuple((e["lo"], e["hi"], e["mass"]) for e in d.get("uniform", []))
        return cls(atoms=atoms, uniform_pieces=pieces)


def unit_model() -> RadiusMeasure:
    """Single atom at radius 1 with mass 1; the default benchmark measure."""
    return RadiusMeasure(atoms=((1.0, 1.0),))


@dataclass(frozen=True)
class SlowChainParams:
    """Parameters of the box-confined slow coverage chain.

    delta is the step width, eta a lower bound on mu((3*delta, oo)), and
    step_rate = 2*delta^2*mu((3*delta, oo)) the exact rate of the chain's
    exponential waiting times.
    """

    delta: float
    eta: float
    step_rate: float

    def __post_init__(self):
        if not (self.delta > 0.0 and self.eta > 0.0):
            raise NoValidDeltaError(f"need delta, eta > 0, got ({self.delta}, {self.eta})")
        if self.step_rate < 2.0 * self.delta**2 * self.eta - 1e-15:
            raise NoValidDeltaError("step_rate below the 2*delta^2*eta floor")


def slow_chain_params(m: RadiusMeasure, delta_override: float | None = None) -> SlowChainParams:
    """Pick the slow-chain step width.

    With an override, eta is the exact tail mass at 3*delta. Otherwise delta
    maximises the exponential-rate lower bound 2*delta^2*mu((3*delta, oo))
    over a 1000-point grid in (0, R0/3], ties broken toward larger delta.
    """
    r0 = m.max_radius()
    if delta_override is not None:
        delta = float(delta_override)
        if not 0.0 < 3.0 * delta < r0:
            raise NoValidDeltaError(f"need 0 < 3*delta < R0={r0}, got delta={delta}")
        eta = m.tail_mass(3.0 * delta)
        if eta <= 0.0:
            raise NoValidDeltaError(f"mu((3*{delta}, oo)) = 0")
        return SlowChainParams(delta=delta, eta=eta, step_rate=2.0 * delta**2 * eta)

    best = None
    for k in range(1, DELTA_GRID_POINTS + 1):
        delta = (r0 / 3.0) * k / DELTA_GRID_POINTS
        eta = m.tail_mass(3.0 * delta)
        if eta <= 0.0:
            continue
        objective = 2.0 * delta**2 * eta
        if best is None or objective >= best[0]:
            best = (objective, delta, eta)
    if best is None:
        raise NoValidDeltaError("no grid delta with positive tail mass")
    _, delta, eta = best
    return SlowChainParams(delta=delta, eta=eta, step_rate=2.0 * delta**2 * eta)
