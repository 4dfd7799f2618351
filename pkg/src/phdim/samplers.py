"""Seeded samplers for Cantor-type, self-similar, product, and torus measures.

The one-dimensional Cantor-type measures are all built from *interval
collections*: finite sets of disjoint congruent subintervals of [0, 1]. Each
level of a construction replaces every interval by its two end pieces, scaled
by the level's ratio. The natural measure gives the two children equal mass.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

LOG2_LOG3 = math.log(2) / math.log(3)
DEFAULT_DEPTH = 40


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalOp:
    """One level of a nested construction.

    ``kind`` is ``K`` (middle thirds), ``Kb`` (middle-beta), ``L`` (thinner
    pieces, ratio ``eta * base``) or ``G`` (thicker pieces, ratio ``base / eta``).
    """

    kind: str
    beta: Optional[float] = None
    eta: float = 5 / 7
    base: float = 1 / 3

    def __post_init__(self):
        if self.kind not in ("K", "Kb", "L", "G"):
            raise ScheduleError(f"unknown interval operation {self.kind!r}")
        if self.kind == "Kb" and not (self.beta is not None and 0 < self.beta < 1):
            raise ScheduleError("K_beta needs beta in (0, 1)")
        if not 0 < self.eta < 1:
            raise ScheduleError("eta must lie in (0, 1)")

    @property
    def scale(self) -> float:
        """Child length as a fraction of the parent length."""
        if self.kind == "K":
            return 1 / 3
        if self.kind == "Kb":
            return (1 - self.beta) / 2
        if self.kind == "L":
            return self.eta * self.base
        return self.base / self.eta

    @classmethod
    def parse(cls, token) -> "IntervalOp":
        """Parse ``"K"``, ``"K(0.5)"``, ``"L"``, ``"L(0.8)"``, ``"G"``/``"Gamma"``."""
        if isinstance(token, IntervalOp):
            return token
        m = re.fullmatch(r"\s*(K|L|G|Gamma)\s*(?:\(\s*([0-9.eE+-]+)\s*\))?\s*", str(token))
        if not m:
            raise ScheduleError(f"cannot parse interval operation {token!r}")
        name, arg = m.group(1), m.group(2)
        if name == "K":
            return cls("Kb", beta=float(arg)) if arg else cls("K")
        kind = "L" if name == "L" else "G"
        return cls(kind, eta=float(arg)) if arg else cls(kind)

    def __str__(self):
        if self.kind == "Kb":
            return f"K({self.beta:g})"
        if self.eta != 5 / 7:
            return f"{self.kind}({self.eta:g})"
        return self.kind


K = IntervalOp("K")
L = IntervalOp("L")
GAMMA = IntervalOp("G")


@dataclass(frozen=True)
class IntervalCollection:
    intervals: np.ndarray  # (k, 2) rows [lo, hi], sorted by lo

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "intervals", iv)
        lengths = iv[:, 1] - iv[:, 0]
        if len(iv) == 0:
            raise ValueError("empty interval collection")
        if np.any(lengths <= 0):
            raise ValueError("intervals must have positive length")
        # endpoints carry ~1 ulp of rounding, which dominates for tiny intervals
        if not np.allclose(lengths, lengths[0], rtol=1e-12, atol=8 * np.finfo(float).eps):
            raise ValueError("intervals must be congruent")
        if iv[0, 0] < 0 or iv[-1, 1] > 1:
            raise ValueError("intervals must lie in [0, 1]")
        if np.any(iv[1:, 0] <= iv[:-1, 1]):
            raise ValueError("intervals must be sorted and pairwise disjoint")

    def __len__(self):
        return len(self.intervals)

    @property
    def count(self) -> int:
        return len(self.intervals)

    @property
    def min_length(self) -> float:
        return float((self.intervals[:, 1] - self.intervals[:, 0]).min())

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Boolean mask: which points of ``x`` lie in the union."""
        x = np.asarray(x, dtype=np.float64).ravel()
        k = np.searchsorted(self.intervals[:, 0], x + tol, side="right") - 1
        k = np.clip(k, 0, len(self.intervals) - 1)
        lo, hi = self.intervals[k, 0], self.intervals[k, 1]
        return (x >= lo - tol) & (x <= hi + tol)

    @classmethod
    def unit(cls) -> "IntervalCollection":
        return cls(np.array([[0.0, 1.0]]))


def apply_interval_op(c: IntervalCollection, op, level: int = 1) -> IntervalCollection:
    """Replace each interval by its two end pieces of relative length ``op.scale``."""
    op = IntervalOp.parse(op)
    s = op.scale
    if s >= 0.5:
        raise ScheduleError(f"schedule invalid at level {level}: {op} children overlap")
    lo, hi = c.intervals[:, 0], c.intervals[:, 1]
    width = s * (hi - lo)
    out = np.empty((2 * len(lo), 2))
    out[0::2, 0], out[0::2, 1] = lo, lo + width
    out[1::2, 0], out[1::2, 1] = hi - width, hi
    return IntervalCollection(out)


@dataclass(frozen=True)
class IntervalSchedule:
    ops: tuple = ()

    def __post_init__(self):
        ops = tuple(IntervalOp.parse(o) for o in self.ops)
        object.__setattr__(self, "ops", ops)
        for level, op in enumerate(ops, start=1):
            if op.scale >= 0.5:
                raise ScheduleError(f"schedule invalid at level {level}: {op} children overlap")

    @property
    def depth(self) -> int:
        return len(self.ops)

    @property
    def scales(self) -> np.ndarray:
        return np.array([op.scale for op in self.ops], dtype=np.float64)

    def lengths(self) -> np.ndarray:
        """Interval length at levels 0..depth."""
        return np.concatenate([[1.0], np.cumprod(self.scales)])

    @property
    def nominal_dimension(self) -> float:
        """log 2 / mean log(1/scale): the similarity dimension at this depth."""
        if not self.ops:
            return 1.0
        return self.depth * math.log(2) / -np.log(self.scales).sum()

    @classmethod
    def cantor(cls, depth: int = DEFAULT_DEPTH, beta: Optional[float] = None) -> "IntervalSchedule":
        op = K if beta is None else IntervalOp("Kb", beta=beta)
        return cls((op,) * depth)

    @classmethod
    def canonical(cls, depth: int = DEFAULT_DEPTH, period: int = 4, eta: float = 5 / 7) -> "IntervalSchedule":
        """Middle thirds, with L and Gamma alternately at levels period, 2*period, ..."""
        ops = []
        for level in range(1, depth + 1):
            if level % period:
                ops.append(K)
            elif (level // period) % 2:
                ops.append(IntervalOp("L", eta=eta))
            else:
                ops.append(IntervalOp("G", eta=eta))
        return cls(tuple(ops))

    def phase(self, level: int) -> int:
        """1-based phase of ``level``: it increments at every L/Gamma level <= level."""
        return 1 + sum(op.kind in ("L", "G") for op in self.ops[:level])

    def __str__(self):
        return ",".join(str(o) for o in self.ops)


def build_schedule_levels(s: IntervalSchedule) -> list:
    """Collections at levels 0..depth, level 0 being [0, 1]."""
    levels = [IntervalCollection.unit()]
    for level, op in enumerate(s.ops, start=1):
        levels.append(apply_interval_op(levels[-1], op, level))
    return levels


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _descend(scales, n, rng):
    """Uniform point in a uniformly random deepest interval of a nested construction."""
    x = rng.random(n)
    for s in scales[::-1]:
        right = rng.integers(0, 2, size=n, dtype=np.int8)
        x = s * x + (1.0 - s) * right
    return x


def sample_nested(s: IntervalSchedule, n: int, seed=None) -> np.ndarray:
    """n i.i.d. points (shape (n, 1)) from the natural measure of a schedule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _descend(s.scales, n, _rng(seed))[:, None]


SIERPINSKI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
MENGER_SHIFTS = np.array(
    [t for t in np.ndindex(3, 3, 3) if sum(c == 1 for c in t) < 2], dtype=np.float64
)

VARIANTS = (
    "cantor-middle-thirds",
    "cantor-middle-beta",
    "nested-schedule",
    "sierpinski-triangle",
    "menger-sponge",
    "cantor-cross-interval",
    "cantor-dust",
    "uniform-cube",
    "torus",
    "stacked-tori",
)


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure to sample, with its parameters.

    Only the fields relevant to ``variant`` are read: ``beta`` for the
    middle-beta Cantor set, ``schedule`` for nested constructions, ``m`` for
    Cantor dust and uniform cubes, ``R``/``r`` for tori and ``offset``/``prob``
    for the stacked tori.
    """

    variant: str
    depth: int = DEFAULT_DEPTH
    beta: Optional[float] = None
    schedule: Optional[IntervalSchedule] = None
    m: int = 2
    R: float = 2.0
    r: float = 1.0
    offset: float = 3.0
    prob: float = 0.5
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown measure variant {self.variant!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.variant == "cantor-middle-beta" and not (self.beta is not None and 0 < self.beta < 1):
            raise ValueError("cantor-middle-beta needs beta in (0, 1)")
        if self.variant == "nested-schedule":
            sched = self.schedule
            if sched is None:
                sched = IntervalSchedule.canonical(self.depth)
            elif not isinstance(sched, IntervalSchedule):
                sched = IntervalSchedule(tuple(sched))
            object.__setattr__(self, "schedule", sched)
        if self.variant in ("cantor-dust", "uniform-cube") and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.variant in ("torus", "stacked-tori") and not self.R > self.r > 0:
            raise ValueError("torus needs R > r > 0")
        if self.variant == "stacked-tori" and not 0 <= self.prob <= 1:
            raise ValueError("prob must lie in [0, 1]")

    @property
    def dimension(self) -> float:
        """Nominal (Ahlfors) dimension of the measure."""
        v = self.variant
        if v == "cantor-middle-thirds":
            return LOG2_LOG3
        if v == "cantor-middle-beta":
            return math.log(2) / (math.log(2) - math.log(1 - self.beta))
        if v == "nested-schedule":
            return self.schedule.nominal_dimension
        if v == "sierpinski-triangle":
            return math.log(3) / math.log(2)
        if v == "menger-sponge":
            return math.log(20) / math.log(3)
        if v == "cantor-cross-interval":
            return 1 + LOG2_LOG3
        if v == "cantor-dust":
            return self.m * LOG2_LOG3
        if v == "uniform-cube":
            return float(self.m)
        return 2.0

    @property
    def ambient_dimension(self) -> int:
        v = self.variant
        if v in ("cantor-middle-thirds", "cantor-middle-beta", "nested-schedule"):
            return 1
        if v in ("sierpinski-triangle", "cantor-cross-interval"):
            return 2
        if v in ("cantor-dust", "uniform-cube"):
            return self.m
        return 3

    def to_dict(self) -> dict:
        d = {"variant": self.variant, "depth": self.depth}
        v = self.variant
        if v == "cantor-middle-beta":
            d["beta"] = self.beta
        elif v == "nested-schedule":
            d["schedule"] = [str(o) for o in self.schedule.ops]
        elif v in ("cantor-dust", "uniform-cube"):
            d["m"] = self.m
        elif v in ("torus", "stacked-tori"):
            d.update(R=self.R, r=self.r)
            if v == "stacked-tori":
                d.update(offset=self.offset, prob=self.prob)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpec":
        d = dict(d)
        variant = d.pop("variant", None) or d.pop("kind", None)
        if variant is None:
            raise ValueError("measure needs a 'variant'")
        sched = d.pop("schedule", None)
        depth = int(d.pop("depth", DEFAULT_DEPTH))
        if variant == "nested-schedule":
            if sched is None or sched == "canonical":
                period = int(d.pop("period", 4))
                eta = float(d.pop("eta", 5 / 7))
                sched = IntervalSchedule.canonical(depth, period=period, eta=eta)
            elif sched == "cantor":
                sched = IntervalSchedule.cantor(depth)
            else:
                if isinstance(sched, str):
                    sched = [t for t in re.split(r",(?![^(]*\))", sched) if t.strip()]
                sched = IntervalSchedule(tuple(sched))
                depth = max(sched.depth, 1)
        known = {"beta", "m", "R", "r", "offset", "prob"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown measure parameters: {sorted(unknown)}")
        kw = {k: d[k] for k in known & set(d)}
        if "m" in kw:
            kw["m"] = int(kw["m"])
        return cls(variant, depth=depth, schedule=sched, **kw)


def _cantor_coords(n, depth, rng, beta=None):
    return _descend(np.full(depth, 1 / 3 if beta is None else (1 - beta) / 2), n, rng)


def _ifs(shifts, ratio, start, depth, rng):
    x = start
    k = len(shifts)
    for _ in range(depth):
        idx = rng.integers(0, k, size=len(x))
        x = ratio * (x + shifts[idx])
    return x


def _sierpinski(n, depth, rng):
    # start uniformly in the hull triangle; every map keeps the hull invariant
    w = rng.dirichlet(np.ones(3), size=n)
    x = w @ SIERPINSKI_VERTICES
    return _ifs(SIERPINSKI_VERTICES, 0.5, x, min(depth, 60), rng)


def _menger(n, depth, rng):
    x = rng.random((n, 3))
    return _ifs(MENGER_SHIFTS, 1 / 3, x, min(depth, 40), rng)


def _torus(n, R, r, rng):
    """Area-uniform torus points by rejection on the tube angle."""
    out = []
    have = 0
    while have < n:
        k = int(1.3 * (n - have)) + 16
        theta = rng.uniform(0, 2 * np.pi, k)
        phi = rng.uniform(0, 2 * np.pi, k)
        keep = rng.random(k) < (R + r * np.cos(phi)) / (R + r)
        theta, phi = theta[keep], phi[keep]
        ring = R + r * np.cos(phi)
        out.append(np.column_stack([ring * np.cos(theta), ring * np.sin(theta), r * np.sin(phi)]))
        have += len(theta)
    return np.concatenate(out)[:n]


def sample_measure(spec: MeasureSpec, n: int, seed=None) -> np.ndarray:
    """n i.i.d. samples from ``spec`` as an (n, m) array; same seed, same bits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    v = spec.variant
    if v == "cantor-middle-thirds":
        return _cantor_coords(n, spec.depth, rng)[:, None]
    if v == "cantor-middle-beta":
        return _cantor_coords(n, spec.depth, rng, spec.beta)[:, None]
    if v == "nested-schedule":
        return sample_nested(spec.schedule, n, rng)
    if v == "sierpinski-triangle":
        return _sierpinski(n, spec.depth, rng)
    if v == "menger-sponge":
        return _menger(n, spec.depth, rng)
    if v == "cantor-cross-interval":
        return np.column_stack([_cantor_coords(n, spec.depth, rng), rng.random(n)])
    if v == "cantor-dust":
        return np.column_stack([_cantor_coords(n, spec.depth, rng) for _ in range(spec.m)])
    if v == "uniform-cube":
        return rng.random((n, spec.m))
    if v == "torus":
        return _torus(n, spec.R, spec.r, rng)
    x = _torus(n, spec.R, spec.r, rng)
    x[rng.random(n) < spec.prob, 2] += spec.offset
    return x
