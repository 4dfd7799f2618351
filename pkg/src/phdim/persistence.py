"""Rips and Čech filtrations, persistent homology over Z/2, and barcode statistics.

Two routes compute a barcode:

* :func:`compute_persistence` reduces an explicit :class:`Filtration` (any
  flavour, small inputs).
* :func:`rips_persistence` never lists the complex. Simplices are keyed by
  ``rank(value) * n**k + lex_code(vertices)``, so integer order is the
  filtration order, and the coboundary matrix is reduced column by column with
  clearing and the apparent-pair shortcut (cohomology gives the same barcode).

Intervals are half-open ``[b, d)`` and only those with ``d > b`` are kept. The
essential degree-0 class is dropped (reduced homology).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._backend import kernels
from .geometry import as_cloud, pairwise_distances

FLAVORS = ("rips", "cech")

# default caps on the number of points for implicit Rips
GUARD_LIMITS = {1: 2500, 2: 400}


class ResourceGuardError(RuntimeError):
    pass


class FiltrationError(ValueError):
    pass


class FilteredSimplex(NamedTuple):
    vertices: tuple
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _sort_key(s: FilteredSimplex):
    return (s.value, len(s.vertices), s.vertices)


@dataclass
class Filtration:
    simplices: list
    max_dim: int
    flavor: str = "rips"
    max_scale: float = math.inf
    truncated: bool = False

    def __len__(self):
        return len(self.simplices)

    def sort(self) -> "Filtration":
        self.simplices.sort(key=_sort_key)
        return self


@dataclass
class Barcode:
    """Finite persistence intervals per degree.

    ``intervals[i]`` is a ``(k, 2)`` array of ``(birth, death)`` rows sorted by
    birth then death. ``essential[i]`` counts classes that never die within the
    computed filtration (excluded from every sum and count); ``truncated_at`` is
    the scale cap when the filtration stopped before it was complete.
    """

    intervals: dict
    flavor: str = "rips"
    max_degree: int = 0
    truncated_at: Optional[float] = None
    essential: dict = field(default_factory=dict)

    def degree(self, i: int) -> np.ndarray:
        if i > self.max_degree or i < 0:
            raise ValueError(f"degree {i} not computed (max degree {self.max_degree})")
        return self.intervals.get(i, np.empty((0, 2)))

    def lengths(self, i: int) -> np.ndarray:
        iv = self.degree(i)
        return iv[:, 1] - iv[:, 0]

    def count(self, i: int) -> int:
        return len(self.degree(i))

    def scaled(self, rho: float) -> "Barcode":
        trunc = None if self.truncated_at is None else self.truncated_at * rho
        return Barcode({k: v * rho for k, v in self.intervals.items()}, self.flavor,
                       self.max_degree, trunc, dict(self.essential))


def _pack(pairs):
    iv = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    iv = iv[iv[:, 1] > iv[:, 0]]
    order = np.lexsort((iv[:, 1], iv[:, 0]))
    return iv[order]


# explicit filtrations ------------------------------------------------------


def build_rips_filtration(dist, max_dim: int, max_scale: float = math.inf) -> Filtration:
    """All simplices up to ``max_dim`` whose diameter is at most ``max_scale``."""
    if max_dim < 0:
        raise FiltrationError("max_dim must be >= 0")
    if not max_scale > 0:
        raise FiltrationError("max_scale must be positive")
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise FiltrationError("distance matrix must be square")
    n = d.shape[0]
    simplices = [FilteredSimplex((v,), 0.0) for v in range(n)]
    truncated = False
    for k in range(2, max_dim + 2):
        for vs in itertools.combinations(range(n), k):
            val = max(d[a, b] for a, b in itertools.combinations(vs, 2))
            if val <= max_scale:
                simplices.append(FilteredSimplex(vs, float(val)))
            else:
                truncated = True
    return Filtration(simplices, max_dim, "rips", max_scale, truncated).sort()


def minimal_enclosing_radius(points) -> float:
    """Radius of the smallest ball containing 1, 2 or 3 points."""
    p = np.asarray(points, dtype=np.float64)
    if len(p) == 1:
        return 0.0
    if len(p) == 2:
        return float(np.linalg.norm(p[0] - p[1]) / 2)
    if len(p) != 3:
        raise FiltrationError("closed form only for up to 3 points")
    sides = sorted(
        float(np.linalg.norm(p[a] - p[b])) for a, b in ((0, 1), (0, 2), (1, 2))
    )
    a, b, c = sides
    if c * c >= a * a + b * b:
        # right, obtuse or collinear: the diametral ball of the longest side
        return c / 2
    s = (a + b + c) / 2
    area = math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))
    return a * b * c / (4 * area)


def build_cech_filtration(cloud, max_dim: int, max_scale: float = math.inf) -> Filtration:
    """Čech filtration in R^m (m <= 3) up to dimension 2; value = enclosing radius."""
    x = as_cloud(cloud)
    if x.shape[1] > 3:
        raise FiltrationError(f"Čech filtration supports ambient dimension <= 3, got {x.shape[1]}")
    if not 0 <= max_dim <= 2:
        raise FiltrationError(f"Čech filtration supports max_dim in 0..2, got {max_dim}")
    if not max_scale > 0:
        raise FiltrationError("max_scale must be positive")
    n = len(x)
    d = pairwise_distances(x)
    simplices = [FilteredSimplex((v,), 0.0) for v in range(n)]
    truncated = False
    for k in range(2, max_dim + 2):
        for vs in itertools.combinations(range(n), k):
            if k == 2:
                val = d[vs[0], vs[1]] / 2
            else:
                # never below a face's value, whatever the rounding
                val = max(minimal_enclosing_radius(x[list(vs)]),
                          max(d[a, b] for a, b in itertools.combinations(vs, 2)) / 2)
            if val <= max_scale:
                simplices.append(FilteredSimplex(vs, float(val)))
            else:
                truncated = True
    return Filtration(simplices, max_dim, "cech", max_scale, truncated).sort()


def _validate(f: Filtration):
    index = {}
    prev = None
    for pos, s in enumerate(f.simplices):
        vs = tuple(s.vertices)
        if list(vs) != sorted(set(vs)):
            raise FiltrationError(f"simplex {vs} must have sorted distinct vertices")
        key = _sort_key(s)
        if prev is not None and key < prev:
            raise FiltrationError(f"filtration not sorted at position {pos}")
        prev = key
        if len(vs) > 1:
            for drop in range(len(vs)):
                face = vs[:drop] + vs[drop + 1:]
                j = index.get(face)
                if j is None:
                    raise FiltrationError(f"face {face} of {vs} is missing or later")
                if f.simplices[j].value > s.value:
                    raise FiltrationError(f"face {face} enters after {vs}")
        index[vs] = pos
    return index


def compute_persistence(f: Filtration) -> Barcode:
    """Standard column reduction over Z/2 with clearing.

    Degrees ``0 .. max_dim - 1`` are complete; ``max_dim`` itself is not
    reported because its deaths would need ``max_dim + 1`` simplices.
    """
    index = _validate(f)
    simplices = f.simplices
    dims = np.array([len(s.vertices) - 1 for s in simplices], dtype=np.int64)
    values = np.array([s.value for s in simplices], dtype=np.float64)
    top = f.max_dim
    paired = np.zeros(len(simplices), dtype=bool)
    pairs = {k: [] for k in range(max(top, 1))}
    # highest dimension first so that positive columns of the next one can be cleared
    for dim in range(top, 0, -1):
        lows = {}
        for j in np.flatnonzero(dims == dim):
            if paired[j]:
                continue
            vs = simplices[j].vertices
            col = {index[vs[:a] + vs[a + 1:]] for a in range(len(vs))}
            while col:
                low = max(col)
                other = lows.get(low)
                if other is None:
                    break
                col ^= other
            if col:
                low = max(col)
                lows[low] = col
                paired[low] = True
                paired[j] = True
                if dim - 1 < top:
                    pairs[dim - 1].append((values[low], values[j]))
    essential = {}
    for k in range(top):
        unpaired = int(np.count_nonzero((dims == k) & ~paired))
        essential[k] = unpaired - 1 if k == 0 else unpaired
    if top == 0:
        essential[0] = max(int(np.count_nonzero(dims == 0)) - 1, 0)
    intervals = {k: _pack(v) for k, v in pairs.items()}
    max_degree = max(top - 1, 0)
    intervals = {k: v for k, v in intervals.items() if k <= max_degree}
    essential = {k: max(v, 0) for k, v in essential.items() if k <= max_degree}
    truncated_at = f.max_scale if (f.truncated or any(essential.values())) and math.isfinite(f.max_scale) else None
    return Barcode(intervals, f.flavor, max_degree, truncated_at, essential)


# implicit Rips -------------------------------------------------------------


def _rank_matrix(d):
    vals, inv = np.unique(d, return_inverse=True)
    n = d.shape[0]
    if len(vals) > np.iinfo(np.int32).max:
        raise ResourceGuardError("too many distinct distances")
    return vals, np.ascontiguousarray(inv.reshape(n, n).astype(np.int32))


def _edges(R, max_rank):
    n = R.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    r = R[iu, ju]
    keep = r <= max_rank
    iu, ju, r = iu[keep], ju[keep], r[keep]
    code = iu.astype(np.int64) * n + ju
    order = np.lexsort((code, r))
    return iu[order], ju[order], r[order], (r[order].astype(np.int64) * n * n + code[order])


def _triangles(R, max_rank):
    n = R.shape[0]
    parts_v, parts_r = [], []
    for i in range(n - 2):
        j, k = np.triu_indices(n - i - 1, k=1)
        j, k = j + i + 1, k + i + 1
        r = np.maximum(np.maximum(R[i, j], R[i, k]), R[j, k])
        keep = r <= max_rank
        j, k, r = j[keep], k[keep], r[keep]
        parts_v.append(np.column_stack([np.full(len(j), i), j, k]).astype(np.int32))
        parts_r.append(r.astype(np.int32))
    if not parts_v:
        return np.empty((0, 3), np.int32), np.empty(0, np.int32), np.empty(0, np.int64)
    v = np.concatenate(parts_v)
    r = np.concatenate(parts_r)
    n64 = np.int64(n)
    code = (v[:, 0].astype(np.int64) * n64 + v[:, 1]) * n64 + v[:, 2]
    order = np.lexsort((code, r))
    v, r, code = v[order], r[order], code[order]
    return np.ascontiguousarray(v), np.ascontiguousarray(r), r.astype(np.int64) * n64**3 + code


def check_guard(n: int, max_degree: int, limits=None):
    limits = GUARD_LIMITS if limits is None else limits
    for deg in range(1, max_degree + 1):
        cap = limits.get(deg)
        if cap is not None and n > cap:
            raise ResourceGuardError(
                f"Rips PH_{deg} on n={n} points exceeds the resource guard (n <= {cap})"
            )


def rips_persistence(
    data,
    max_degree: int = 1,
    max_scale: Optional[float] = None,
    distance_matrix: bool = False,
    metric: str = "euclidean",
    guard: bool = True,
    limits=None,
) -> Barcode:
    """Rips barcode of a point cloud (or of a distance matrix) in degrees 0..max_degree."""
    if not 0 <= max_degree <= 2:
        raise ValueError("max_degree must be 0, 1 or 2")
    if distance_matrix:
        d = np.asarray(data, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise ValueError("distance matrix must be square and nonempty")
    else:
        d = pairwise_distances(data, metric)
    n = d.shape[0]
    if guard:
        check_guard(n, max_degree, limits)
    vals, R = _rank_matrix(d)
    # at the enclosing radius the complex is a cone, so every class has died
    enclosing = float(d.max(axis=1).min())
    if max_scale is None or max_scale >= enclosing:
        max_rank = int(np.searchsorted(vals, enclosing, side="right")) - 1
        truncated_at = None
    else:
        max_rank = int(np.searchsorted(vals, max_scale, side="right")) - 1
        truncated_at = float(max_scale)
    if n > 1 and max_rank * float(n) ** (max_degree + 2) >= 2.0**62:
        raise ResourceGuardError("simplex keys would overflow 64 bits")
    intervals, essential = {}, {}

    iu, ju, er, ekeys = _edges(R, max_rank)
    tree = kernels.kruskal_select(iu.astype(np.int64), ju.astype(np.int64), n).astype(bool)
    intervals[0] = _pack(np.column_stack([np.zeros(tree.sum()), vals[er[tree]]]))
    essential[0] = n - 1 - int(tree.sum())

    if max_degree >= 1:
        verts = np.ascontiguousarray(np.column_stack([iu, ju]).astype(np.int32))
        death, _, _ = kernels.rips_reduce(
            R, verts, np.ascontiguousarray(er.astype(np.int32)),
            np.ascontiguousarray(tree.astype(np.uint8)), max_rank, np.int64(n) ** 3,
        )
        live = death >= 0
        base = np.int64(n) ** 3
        intervals[1] = _pack(np.column_stack([vals[er[live]], vals[death[live] // base]]))
        essential[1] = int(np.count_nonzero(~live & ~tree))
        if max_degree >= 2:
            tv, tr, tkeys = _triangles(R, max_rank)
            cleared = np.zeros(len(tv), dtype=np.uint8)
            pos = np.searchsorted(tkeys, death[live])
            cleared[pos] = 1
            death2, _, _ = kernels.rips_reduce(
                R, tv, tr, cleared, max_rank, np.int64(n) ** 4
            )
            live2 = death2 >= 0
            intervals[2] = _pack(
                np.column_stack([vals[tr[live2]], vals[death2[live2] // np.int64(n) ** 4]])
            )
            essential[2] = int(np.count_nonzero(~live2 & (cleared == 0)))
    if truncated_at is None and any(essential.values()):
        truncated_at = float(vals[max_rank])
    return Barcode(intervals, "rips", max_degree, truncated_at, essential)


def cech_persistence(cloud, max_degree: int = 1, max_scale: float = math.inf) -> Barcode:
    """Čech barcode through the explicit filtration (small clouds in R^{<=3})."""
    return compute_persistence(build_cech_filtration(cloud, max_degree + 1, max_scale))


def persistence_barcode(cloud, flavor: str = "rips", max_degree: int = 1, **kw) -> Barcode:
    if flavor == "rips":
        return rips_persistence(cloud, max_degree, **kw)
    if flavor == "cech":
        return cech_persistence(cloud, max_degree, **kw)
    raise ValueError(f"unknown flavor {flavor!r}")


# statistics ------------------------------------------------------------------


def _degree_lengths(b, i):
    if isinstance(b, Barcode):
        return b.lengths(i)
    iv = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    return iv[:, 1] - iv[:, 0]


def barcode_alpha_weight(b, i: int, alpha: float, eps: float = 0.0) -> float:
    """Sum of ``|I|**alpha`` over degree-i intervals longer than ``eps``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    lengths = _degree_lengths(b, i)
    lengths = lengths[lengths > eps]
    return float(np.sum(lengths**alpha))


def interval_count_exceeding(b, i: int, eps: float = 0.0) -> int:
    """Number of degree-i intervals strictly longer than ``eps``."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return int(np.count_nonzero(_degree_lengths(b, i) > eps))
