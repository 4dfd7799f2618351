"""Point clouds, distances, and the ball/box counting primitives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

MODES = ("disjoint-balls", "grid-boxes", "grid-boxes-threshold")


class EmptyInputError(ValueError):
    pass


def as_cloud(points) -> np.ndarray:
    """Validate ``points`` as an (n, m) float array of finite coordinates.

    A 1-d sequence is read as n points on the line.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"point cloud must be 2-d, got shape {x.shape}")
    if x.shape[0] == 0 or x.shape[1] == 0:
        raise EmptyInputError("empty input")
    if not np.all(np.isfinite(x)):
        raise ValueError("point cloud has non-finite coordinates")
    return np.ascontiguousarray(x)


def pairwise_distances(cloud, metric: str = "euclidean") -> np.ndarray:
    x = as_cloud(cloud)
    diff = x[:, None, :] - x[None, :, :]
    if metric == "euclidean":
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    elif metric == "chebyshev":
        d = np.abs(diff).max(axis=2)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return d


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point sets in the same R^m."""
    x, y = as_cloud(a), as_cloud(b)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    d = np.sqrt(((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=2))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass(frozen=True)
class BallCount:
    scale: float
    count: int
    mode: str
    mass_threshold: Optional[float] = None


def _grid_cells(x, delta):
    return np.floor(x / delta).astype(np.int64)


def _greedy_packing(x, delta, seed):
    # open balls of radius delta are disjoint iff centres are >= 2*delta apart
    order = np.random.default_rng(seed).permutation(len(x))
    centres = np.empty_like(x)
    k = 0
    sep2 = (2.0 * delta) ** 2
    for idx in order:
        p = x[idx]
        if k and np.min(((centres[:k] - p) ** 2).sum(axis=1)) < sep2:
            continue
        centres[k] = p
        k += 1
    return k


def count_scale(
    cloud,
    delta: float,
    mode: str = "grid-boxes",
    mass_threshold: Optional[float] = None,
    dim: Optional[float] = None,
    n_ref: Optional[int] = None,
    seed: int = 0,
) -> BallCount:
    """Count occupied scale-``delta`` cells of a sample.

    ``disjoint-balls`` greedily packs disjoint open balls of radius ``delta``
    centred at sample points (visiting points in a seeded random order), a
    stand-in for the maximal packing number. ``grid-boxes`` counts occupied cubes
    of the origin-anchored grid of mesh ``delta``; ``grid-boxes-threshold`` keeps
    only cubes holding at least ``mass_threshold * delta**dim`` of the empirical
    mass (sample fraction out of ``n_ref`` points, default the cloud size).
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = as_cloud(cloud)
    if mode == "disjoint-balls":
        return BallCount(float(delta), _greedy_packing(x, delta, seed), mode)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    cells, counts = np.unique(_grid_cells(x, delta), axis=0, return_counts=True)
    if mode == "grid-boxes":
        return BallCount(float(delta), int(len(cells)), mode)
    if mass_threshold is None or mass_threshold < 0:
        raise ValueError("thresholded mode needs mass_threshold >= 0")
    if dim is None:
        raise ValueError("thresholded mode needs the dimension d")
    n_ref = len(x) if n_ref is None else n_ref
    keep = counts / n_ref >= mass_threshold * delta**dim
    return BallCount(float(delta), int(keep.sum()), mode, float(mass_threshold))
