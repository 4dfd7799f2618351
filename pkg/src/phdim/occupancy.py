"""Monte Carlo check of the law of large numbers for uniform occupancy indicators.

The probability space is [0, 1] with Lebesgue measure. It is cut into
``floor(a n)`` contiguous blocks of width ``(q + r p) / n``; block j holds one
set A_j of mass ``q / n`` followed by r sets B_j1..B_jr of mass ``p / n``. With n
uniform samples, indicator X_j is 1 when A_j is empty and every B_jt is hit.
Y_n = (1/n) sum_j X_j converges to ``a exp(-q) (1 - exp(-p))**r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import map_trials, trial_rng


class OccupancyError(ValueError):
    pass


def _check_params(p, q, r, a):
    if p < 0 or q < 0 or a < 0:
        raise OccupancyError("p, q and a must be non-negative")
    if int(r) != r or r < 0:
        raise OccupancyError("r must be a non-negative integer")
    if a * (q + r * p) > 1 + 1e-12:
        raise OccupancyError(
            f"infeasible mass layout: a*(q + r*p) = {a * (q + r * p):.6g} exceeds 1"
        )


def occupancy_gamma(p: float, q: float, r: int, a: float) -> float:
    """Limit of Y_n: ``a * exp(-q) * (1 - exp(-p))**r``."""
    _check_params(p, q, r, a)
    return a * math.exp(-q) * (1 - math.exp(-p)) ** int(r)


@dataclass(frozen=True)
class OccupancyConfig:
    p: float
    q: float
    r: int
    a: float
    n: int = 100_000
    trials: int = 50

    def __post_init__(self):
        _check_params(self.p, self.q, self.r, self.a)
        if self.n < 1 or self.trials < 1:
            raise OccupancyError("n and trials must be >= 1")

    @property
    def blocks(self) -> int:
        return math.floor(self.a * self.n)

    @property
    def gamma(self) -> float:
        return occupancy_gamma(self.p, self.q, self.r, self.a)


@dataclass
class OccupancyResult:
    n: int
    empirical_mean: float
    analytic_gamma: float
    stderr: float
    trials: int
    values: np.ndarray

    def row(self) -> dict:
        return {
            "n": self.n,
            "empirical_mean": self.empirical_mean,
            "analytic_gamma": self.analytic_gamma,
            "stderr": self.stderr,
            "trials": self.trials,
        }


def occupancy_trial(cfg: OccupancyConfig, rng: np.random.Generator) -> float:
    """One draw of Y_n."""
    n, k, r = cfg.n, cfg.blocks, int(cfg.r)
    width = (cfg.q + r * cfg.p) / n
    if k == 0:
        return 0.0
    if width == 0:
        return k / n
    u = rng.random(n)
    block = np.minimum(np.floor(u / width), k).astype(np.int64)
    inside = block < k
    block, off = block[inside], u[inside] - block[inside] * width
    # slot 0 is A_j, slots 1..r are the B sets
    qn, pn = cfg.q / n, cfg.p / n
    slot = np.zeros(len(off), dtype=np.int64)
    if pn > 0:
        slot = np.where(off < qn, 0, 1 + np.floor((off - qn) / pn).astype(np.int64))
    valid = slot <= r
    hits = np.bincount(block[valid] * (r + 1) + slot[valid], minlength=k * (r + 1)).reshape(k, r + 1)
    a_empty = hits[:, 0] == 0 if cfg.q > 0 else np.ones(k, bool)
    b_hit = np.all(hits[:, 1:] > 0, axis=1)
    return float(np.count_nonzero(a_empty & b_hit)) / n


def simulate_occupancy_lln(cfg: OccupancyConfig, seed: int = 0, threads: int = 1) -> OccupancyResult:
    vals = np.asarray(
        map_trials(lambda t: occupancy_trial(cfg, trial_rng(seed, cfg.n, t)),
                   [(t,) for t in range(cfg.trials)], threads)
    )
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return OccupancyResult(cfg.n, float(vals.mean()), cfg.gamma, se, cfg.trials, vals)
