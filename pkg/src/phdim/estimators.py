"""Dimension estimators: PH alpha-weight growth, box counting, correlation sums.

The PH estimator fits ``log E[E^i_alpha] = c + beta log n`` by least squares
over a geometric ladder of sample sizes and reports ``alpha / (1 - beta)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._backend import kernels
from .geometry import as_cloud, count_scale
from .mst import euclidean_mst, mst_alpha_weight
from .persistence import barcode_alpha_weight, interval_count_exceeding, persistence_barcode
from .samplers import MeasureSpec, sample_measure


class EstimatorError(ValueError):
    pass


DEFAULT_LADDERS = {
    0: ([2**k for k in range(8, 14)], 20),
    1: ([2**k for k in range(7, 11)], 10),
}


def default_ladder(i: int):
    """(n ladder, trials) used when the caller gives none."""
    return DEFAULT_LADDERS[0 if i == 0 else 1]


@dataclass(frozen=True)
class RungStat:
    n: float
    mean: float
    variance: float
    trials: int


@dataclass
class RegressionEstimate:
    beta: float
    dim: float
    stderr: float
    dim_stderr: float
    intercept: float
    alpha: float
    degree: Optional[int] = None
    points: list = field(default_factory=list)
    seed: Optional[int] = None


@dataclass
class DimensionReport:
    method: str
    estimate: float
    stderr: float
    ladder: tuple
    seed: Optional[int] = None
    alpha: Optional[float] = None
    degree: Optional[int] = None
    points: list = field(default_factory=list)

    def row(self) -> dict:
        return {
            "method": self.method,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "param_alpha": "" if self.alpha is None else self.alpha,
            "param_i": "" if self.degree is None else self.degree,
            "seed": "" if self.seed is None else self.seed,
        }


def _check_ladder(ladder, what="ladder", min_rungs=4):
    lad = np.asarray(ladder, dtype=np.float64).ravel()
    if len(np.unique(lad)) < min_rungs:
        raise EstimatorError(f"degenerate {what}: need >= {min_rungs} distinct rungs")
    if np.any(lad <= 0) or not np.all(np.isfinite(lad)):
        raise EstimatorError(f"degenerate {what}: rungs must be positive")
    ratios = np.diff(np.log(np.sort(lad)))
    if np.any(ratios <= 0) or ratios.max() > 1.25 * ratios.min() + 1e-9:
        raise EstimatorError(f"degenerate {what}: rungs must be geometric")
    return lad


def _ols(x, y):
    """Slope, intercept and slope standard error of y ~ x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    dof = len(x) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, intercept, se


def fit_ph_dimension(ns, means, alpha: float, variances=None, trials=None, degree=None,
                     seed=None) -> RegressionEstimate:
    """alpha / (1 - beta) from the log-log slope beta of mean statistic vs n."""
    if not alpha > 0:
        raise EstimatorError("alpha must be positive")
    ns = _check_ladder(ns, "n ladder")
    means = np.asarray(means, dtype=np.float64)
    if means.shape != ns.shape or np.any(means <= 0) or not np.all(np.isfinite(means)):
        raise EstimatorError("means must be positive and finite, one per rung")
    beta, intercept, se = _ols(np.log(ns), np.log(means))
    if beta >= 1 - 1e-6:
        raise EstimatorError(f"estimator divergent: slope {beta:.6g} >= 1")
    dim = alpha / (1 - beta)
    variances = np.zeros_like(means) if variances is None else np.asarray(variances, float)
    trials = np.ones(len(ns), int) if trials is None else np.broadcast_to(trials, ns.shape)
    pts = [RungStat(float(n), float(m), float(v), int(t))
           for n, m, v, t in zip(ns, means, variances, trials)]
    return RegressionEstimate(beta, dim, se, alpha * se / (1 - beta) ** 2, intercept, alpha,
                              degree, pts, seed)


def alpha_weight(cloud, i: int, alpha: float, flavor: str = "rips", **kw) -> float:
    """E^i_alpha of a cloud. Degree 0 goes through the MST."""
    if i == 0:
        x = as_cloud(cloud)
        if x.shape[1] == 1:
            # the MST of points on a line joins consecutive points
            w = float(np.sum(np.diff(np.sort(x[:, 0])) ** alpha))
        else:
            w = mst_alpha_weight(euclidean_mst(x, warn=False), alpha)
        return w if flavor == "rips" else w * 0.5**alpha
    return barcode_alpha_weight(persistence_barcode(cloud, flavor, max_degree=i, **kw), i, alpha)


def interval_count(cloud, i: int, flavor: str = "rips", **kw) -> int:
    """|PH_i| of a cloud."""
    if i == 0:
        return int(np.count_nonzero(euclidean_mst(cloud, warn=False).lengths > 0))
    return interval_count_exceeding(persistence_barcode(cloud, flavor, max_degree=i, **kw), i)


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Generator for one (rung, trial); independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(n), int(trial))))


def map_trials(fn, jobs, threads: int = 1) -> list:
    """``[fn(*job) for job in jobs]``, optionally on a thread pool; order preserved."""
    if threads is None or threads <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def sample_statistic(spec: MeasureSpec, n_ladder, trials: int, seed: int, statistic,
                     threads: int = 1) -> np.ndarray:
    """``statistic(cloud)`` for every (rung, trial); shape (len(n_ladder), trials)."""
    if trials < 1:
        raise EstimatorError("trials must be >= 1")

    def one(n, t):
        return statistic(sample_measure(spec, int(n), trial_rng(seed, n, t)))

    jobs = [(n, t) for n in n_ladder for t in range(trials)]
    vals = map_trials(one, jobs, threads)
    return np.asarray(vals, dtype=np.float64).reshape(len(n_ladder), trials)


def ph_dimension_estimate(spec: MeasureSpec, i: int = 0, alpha: float = 1.0, n_ladder=None,
                          trials: Optional[int] = None, seed: int = 0, threads: int = 1,
                          flavor: str = "rips") -> RegressionEstimate:
    """PH_i^alpha dimension of a sampler by regression over an n ladder."""
    if not alpha > 0:
        raise EstimatorError("alpha must be positive")
    lad, tr = default_ladder(i)
    n_ladder = lad if n_ladder is None else list(n_ladder)
    trials = tr if trials is None else trials
    _check_ladder(n_ladder, "n ladder")
    vals = sample_statistic(spec, n_ladder, trials, seed,
                            lambda x: alpha_weight(x, i, alpha, flavor), threads)
    var = vals.var(axis=1, ddof=1) if trials > 1 else np.zeros(len(n_ladder))
    return fit_ph_dimension(n_ladder, vals.mean(axis=1), alpha, var, trials, i, seed)


def _extent(x):
    span = float((x.max(axis=0) - x.min(axis=0)).max())
    return span if span > 0 else 1.0


def default_box_ladder(cloud, rungs: int = 6) -> np.ndarray:
    """Geometric deltas from a quarter of the extent down to where boxes would
    hold ~20 points if the cloud filled its ambient cube."""
    x = as_cloud(cloud)
    ext = _extent(x)
    n, m = x.shape
    hi = ext / 4
    lo = ext * max(n / 20, 4.0) ** (-1 / m)
    lo = min(lo, hi / 4)
    return np.geomspace(hi, lo, rungs)


def box_dimension_estimate(cloud, delta_ladder=None, seed: Optional[int] = None) -> DimensionReport:
    """Slope of log(occupied grid boxes) against -log(delta)."""
    x = as_cloud(cloud)
    lad = default_box_ladder(x) if delta_ladder is None else np.asarray(delta_ladder, float)
    lad = _check_ladder(lad, "delta ladder")
    counts = np.array([count_scale(x, d, "grid-boxes").count for d in lad], dtype=np.float64)
    slope, _, se = _ols(-np.log(lad), np.log(counts))
    pts = [{"scale": float(d), "count": int(c)} for d, c in zip(lad, counts)]
    return DimensionReport("box", slope, se, tuple(float(d) for d in lad), seed, points=pts)


def _pair_distance_quantile(x, q, rng, pairs=200_000):
    n = len(x)
    i = rng.integers(0, n, pairs)
    j = rng.integers(0, n, pairs)
    keep = i != j
    d = np.sqrt(((x[i[keep]] - x[j[keep]]) ** 2).sum(axis=1))
    return float(np.quantile(d, q)) if len(d) else 0.0


def default_correlation_ladder(cloud, rungs: int = 6, seed: int = 0) -> np.ndarray:
    """Two decades below the 1% pair-distance quantile, shortened if the bottom
    rung would hold fewer than ~100 pairs."""
    x = as_cloud(cloud)
    rng = np.random.default_rng(seed)
    hi = _pair_distance_quantile(x, 0.01, rng)
    if hi <= 0:
        raise EstimatorError("all pairs coincident")
    total = len(x) * (len(x) - 1) / 2
    floor_q = min(100 / total, 0.01) if total else 0.01
    lo = max(hi / 100, _pair_distance_quantile(x, floor_q, rng))
    if not lo < hi:
        lo = hi / 10
    return np.geomspace(hi, lo, rungs)


def correlation_dimension_estimate(cloud, r_ladder=None, seed: Optional[int] = None) -> DimensionReport:
    """Slope of log C(r) against log r, C(r) the fraction of pairs closer than r.

    Rungs with no pairs are dropped; a C(r) that is the same on every rung
    (including zero) gives slope 0.
    """
    x = as_cloud(cloud)
    n = len(x)
    if n < 2:
        raise EstimatorError("correlation dimension needs n >= 2")
    if np.all(x == x[0]):
        raise EstimatorError("all pairs coincident")
    lad = default_correlation_ladder(x, seed=0 if seed is None else seed) if r_ladder is None \
        else np.asarray(r_ladder, float)
    lad = _check_ladder(lad, "r ladder")
    counts = np.asarray(kernels.pair_counts_below(x, np.ascontiguousarray(lad)), dtype=np.float64)
    frac = counts / (n * (n - 1) / 2)
    pts = [{"scale": float(r), "pairs": int(c)} for r, c in zip(lad, counts)]
    ladder = tuple(float(r) for r in lad)
    if np.all(counts == counts[0]):
        return DimensionReport("correlation", 0.0, 0.0, ladder, seed, points=pts)
    pos = counts > 0
    if pos.sum() < 2:
        raise EstimatorError("correlation sum is zero on all but one rung")
    slope, _, se = _ols(np.log(lad[pos]), np.log(frac[pos]))
    return DimensionReport("correlation", slope, se, ladder, seed, points=pts)


@dataclass
class AhlforsReport:
    d: float
    deltas: np.ndarray
    ratios: np.ndarray  # (centers, len(deltas)) of mass / delta**d
    min_ratio: float
    max_ratio: float
    trend: float  # slope of log median ratio against log delta
    verdict: str

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio if self.min_ratio > 0 else math.inf


def ahlfors_regularity_diagnostic(spec: MeasureSpec, d: float, delta_ladder=None,
                                  centers: int = 100, n: int = 100_000, seed: int = 0,
                                  max_spread: float = 100.0, max_trend: float = 0.1,
                                  cloud=None) -> AhlforsReport:
    """Empirical mu(B_delta(x)) / delta**d over random sample centres and a delta ladder.

    The verdict is ``regular-consistent`` when every ratio is positive, the
    max/min spread is at most ``max_spread`` and the median ratio shows no trend
    along the ladder (``|slope| <= max_trend`` in log-log); otherwise
    ``inconsistent``.
    """
    if not d > 0:
        raise EstimatorError("d must be positive")
    deltas = np.asarray([3.0**-k for k in range(2, 7)] if delta_ladder is None else delta_ladder,
                        dtype=np.float64)
    if len(deltas) < 2 or np.any(deltas <= 0):
        raise EstimatorError("degenerate delta ladder")
    if deltas.min() ** d * n < 30:
        raise EstimatorError(
            f"underpowered: expected ball mass {deltas.min() ** d:.3g} < 30/n at n={n}"
        )
    rng = np.random.default_rng(seed)
    x = sample_measure(spec, n, rng) if cloud is None else as_cloud(cloud)
    idx = rng.choice(len(x), size=min(centers, len(x)), replace=False)
    ratios = np.empty((len(idx), len(deltas)))
    for row, c in enumerate(idx):
        dist = np.sqrt(((x - x[c]) ** 2).sum(axis=1))
        ratios[row] = (dist[:, None] < deltas[None, :]).sum(axis=0) / len(x) / deltas**d
    lo, hi = float(ratios.min()), float(ratios.max())
    trend, _, _ = _ols(np.log(deltas), np.log(np.median(ratios, axis=0)))
    ok = lo > 0 and hi / lo <= max_spread and abs(trend) <= max_trend
    return AhlforsReport(d, deltas, ratios, lo, hi, trend, "regular-consistent" if ok else "inconsistent")
