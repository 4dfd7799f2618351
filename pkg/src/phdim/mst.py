"""Minimum spanning trees of finite metric spaces and their alpha-weights."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .geometry import as_cloud


class ZeroLengthEdgeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MST:
    """Spanning tree as an edge list; ``lengths`` is sorted ascending."""

    edges: np.ndarray  # (n - 1, 2) int64, i < j
    lengths: np.ndarray  # (n - 1,)
    n: int

    def __len__(self):
        return len(self.lengths)


def _check_zero(lengths):
    z = int(np.count_nonzero(lengths == 0))
    if z:
        warnings.warn(
            f"{z} zero-length MST edge(s): duplicate points in the sample",
            ZeroLengthEdgeWarning,
            stacklevel=3,
        )


def minimum_spanning_tree(dist) -> MST:
    """Kruskal's algorithm on a symmetric distance matrix.

    Ties are broken lexicographically on ``(length, i, j)`` with ``i < j``, so
    the tree is fully determined by the matrix.
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty input")
    if not np.allclose(d, d.T, rtol=0, atol=0, equal_nan=False):
        raise ValueError("distance matrix must be symmetric")
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distances must be finite and non-negative")
    iu, ju = np.triu_indices(n, k=1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    iu, ju, w = iu[order], ju[order], w[order]
    mask = kernels.kruskal_select(
        np.ascontiguousarray(iu, dtype=np.int64), np.ascontiguousarray(ju, dtype=np.int64), n
    ).astype(bool)
    tree = MST(np.column_stack([iu[mask], ju[mask]]).astype(np.int64), w[mask], n)
    _check_zero(tree.lengths)
    return tree


def euclidean_mst(points, metric: str = "euclidean", warn: bool = True) -> MST:
    """MST of a point cloud without forming the distance matrix.

    Uses the sorted gaps on the line and dense Prim otherwise. The edge set may
    differ from the Kruskal tree under ties, but the multiset of lengths is the
    same for every MST of a given metric space. ``warn=False`` silences the
    duplicate-point warning (deep Cantor-type samplers collide at double
    precision).
    """
    x = as_cloud(points)
    n = len(x)
    if x.shape[1] == 1:
        order = np.argsort(x[:, 0], kind="stable")
        xs = x[order, 0]
        lengths = np.diff(xs)
        a, b = order[:-1], order[1:]
    else:
        if metric not in ("euclidean", "chebyshev"):
            raise ValueError(f"unknown metric {metric!r}")
        lengths, a, b = kernels.prim_mst(x, metric == "chebyshev")
    edges = np.column_stack([np.minimum(a, b), np.maximum(a, b)]).astype(np.int64).reshape(-1, 2)
    order = np.argsort(lengths, kind="stable")
    tree = MST(edges[order], np.asarray(lengths)[order], n)
    if warn:
        _check_zero(tree.lengths)
    return tree


def _lengths(tree) -> np.ndarray:
    if isinstance(tree, MST):
        return tree.lengths
    return np.asarray(tree, dtype=np.float64)


def mst_alpha_weight(tree, alpha: float) -> float:
    """Sum of edge length to the power alpha (``alpha`` > 0)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    lengths = _lengths(tree)
    return float(np.sum(lengths**alpha))


def mst_edges_exceeding(tree, eps: float) -> int:
    """Number of edges strictly longer than ``eps``."""
    return int(np.count_nonzero(_lengths(tree) > eps))
