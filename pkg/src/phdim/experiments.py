"""Config-driven scaling experiments.

Each ``run_*`` function takes an :class:`ExperimentConfig`, writes CSVs into an
output directory (every file headed by the config hash and master seed) and
returns an in-memory result. Per-trial randomness comes from
``SeedSequence(seed, spawn_key=(n, trial))`` so thread count never changes the
bytes written.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .estimators import (
    DimensionReport,
    alpha_weight,
    box_dimension_estimate,
    correlation_dimension_estimate,
    default_ladder,
    fit_ph_dimension,
    interval_count,
    map_trials,
    trial_rng,
)
from .io import ConfigError, config_hash, ingest_point_cloud, load_config, write_csv
from .occupancy import OccupancyConfig, OccupancyError, simulate_occupancy_lln
from .samplers import IntervalSchedule, MeasureSpec, ScheduleError, sample_measure

KINDS = ("convergence", "oscillation", "count-scaling", "occupancy", "dimension-report")

COUNT_LADDER = [200, 336, 566, 951, 1600]
OSCILLATION_LEVELS = list(range(6, 22))


@dataclass
class ExperimentConfig:
    kind: str
    spec: Optional[MeasureSpec] = None
    csv: Optional[Path] = None
    dim: Optional[float] = None
    degree: int = 0
    alpha: float = 1.0
    n_ladder: Optional[list] = None
    trials: Optional[int] = None
    seed: int = 0
    threads: int = 1
    flavor: str = "rips"
    out: Optional[Path] = None
    options: dict = field(default_factory=dict)
    hash: str = ""

    @property
    def d(self) -> float:
        """Dimension used to normalise statistics."""
        if self.dim is not None:
            return float(self.dim)
        if self.spec is not None:
            return self.spec.dimension
        raise ConfigError("missing d: CSV inputs need an explicit [measure] dim")

    def meta(self, **extra) -> dict:
        m = {"config_hash": self.hash, "seed": self.seed, "kind": self.kind}
        m.update(extra)
        return m

    @classmethod
    def from_dict(cls, raw: dict, hash_: Optional[str] = None, base_dir=None) -> "ExperimentConfig":
        if not isinstance(raw, dict) or "experiment" not in raw:
            raise ConfigError("config needs an [experiment] table")
        exp = dict(raw["experiment"])
        kind = exp.pop("kind", None)
        if kind not in KINDS:
            raise ConfigError(f"experiment kind must be one of {KINDS}, got {kind!r}")
        spec = csv = dim = None
        measure = dict(raw.get("measure", {}))
        if kind != "occupancy":
            if not measure:
                raise ConfigError(f"{kind} experiment needs a [measure] table")
            dim = measure.pop("dim", None)
            if "csv" in measure:
                csv = Path(measure.pop("csv"))
                if base_dir is not None and not csv.is_absolute():
                    csv = Path(base_dir) / csv
                if measure:
                    raise ConfigError(f"unexpected [measure] keys with csv: {sorted(measure)}")
            else:
                try:
                    spec = MeasureSpec.from_dict(measure)
                except (ValueError, ScheduleError) as exc:
                    raise ConfigError(f"invalid [measure]: {exc}") from None
        try:
            cfg = cls(
                kind=kind,
                spec=spec,
                csv=csv,
                dim=None if dim is None else float(dim),
                degree=int(exp.pop("degree", exp.pop("i", 0))),
                alpha=float(exp.pop("alpha", 0.5 if kind == "oscillation" else 1.0)),
                n_ladder=exp.pop("n_ladder", None),
                trials=exp.pop("trials", None),
                seed=int(exp.pop("seed", 0)),
                threads=int(exp.pop("threads", 1)),
                flavor=str(exp.pop("flavor", "rips")),
                out=Path(exp.pop("out")) if "out" in exp else None,
                options=dict(raw.get(kind, {})),
                hash=hash_ or _content_hash(raw),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [experiment] value: {exc}") from None
        if exp:
            raise ConfigError(f"unknown [experiment] keys: {sorted(exp)}")
        if cfg.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if cfg.degree < 0 or cfg.degree > 2:
            raise ConfigError("degree must be 0, 1 or 2")
        if cfg.seed < 0:
            raise ConfigError("seed must be non-negative")
        if cfg.flavor not in ("rips", "cech"):
            raise ConfigError("flavor must be rips or cech")
        if cfg.trials is not None and int(cfg.trials) < 1:
            raise ConfigError("trials must be >= 1")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        raw, h = load_config(path)
        return cls.from_dict(raw, h, base_dir=Path(path).parent)


def _content_hash(raw: dict) -> str:
    # thread count only schedules work, so it stays out of the hash
    exp = {k: v for k, v in raw.get("experiment", {}).items() if k != "threads"}
    return config_hash({**raw, "experiment": exp})


def _sampler(cfg: ExperimentConfig):
    """``draw(n, trial) -> cloud`` for the configured measure or CSV cloud."""
    if cfg.spec is not None:
        return lambda n, t: sample_measure(cfg.spec, int(n), trial_rng(cfg.seed, n, t))
    cloud = ingest_point_cloud(cfg.csv)

    def draw(n, t):
        if n > len(cloud):
            raise ConfigError(f"n={n} exceeds the {len(cloud)} points in {cfg.csv}")
        idx = trial_rng(cfg.seed, n, t).choice(len(cloud), size=int(n), replace=False)
        return cloud[np.sort(idx)]

    return draw


def _ladder(cfg, default_n, default_trials):
    ladder = [int(n) for n in (cfg.n_ladder or default_n)]
    trials = int(cfg.trials or default_trials)
    if not ladder or min(ladder) < 1:
        raise ConfigError("n_ladder must hold positive counts")
    return ladder, trials


def _out(cfg, out):
    out = Path(out if out is not None else (cfg.out or "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# convergence -----------------------------------------------------------------


@dataclass
class ConvergenceResult:
    n: np.ndarray
    values: np.ndarray  # (rungs, trials) raw statistic
    normalized: np.ndarray
    exponent: float

    @property
    def normalized_means(self) -> np.ndarray:
        return self.normalized.mean(axis=1)


def run_convergence_experiment(cfg: ExperimentConfig, out=None) -> ConvergenceResult:
    """E^i_alpha and n^{-(d-alpha)/d} E^i_alpha per (n, trial)."""
    d = cfg.d
    ladder, trials = _ladder(cfg, *default_ladder(cfg.degree))
    draw = _sampler(cfg)
    jobs = [(n, t) for n in ladder for t in range(trials)]
    vals = map_trials(lambda n, t: alpha_weight(draw(n, t), cfg.degree, cfg.alpha, cfg.flavor),
                      jobs, cfg.threads)
    vals = np.asarray(vals, dtype=np.float64).reshape(len(ladder), trials)
    expo = (d - cfg.alpha) / d
    ns = np.asarray(ladder, dtype=np.float64)
    norm = vals / ns[:, None] ** expo
    res = ConvergenceResult(ns, vals, norm, expo)
    if out is not None or cfg.out is not None:
        o = _out(cfg, out)
        meta = cfg.meta(alpha=cfg.alpha, degree=cfg.degree, d=d)
        write_csv(o / "convergence_trials.csv", ["n", "trial", "statistic", "normalized"],
                  ({"n": n, "trial": t, "statistic": vals[a, t], "normalized": norm[a, t]}
                   for a, n in enumerate(ladder) for t in range(trials)), meta)
        ddof = 1 if trials > 1 else 0
        write_csv(o / "convergence_summary.csv",
                  ["n", "mean", "variance", "normalized_mean", "normalized_variance", "trials"],
                  ({"n": n, "mean": vals[a].mean(), "variance": vals[a].var(ddof=ddof),
                    "normalized_mean": norm[a].mean(), "normalized_variance": norm[a].var(ddof=ddof),
                    "trials": trials} for a, n in enumerate(ladder)), meta)
    return res


# oscillation -----------------------------------------------------------------


def phase_ratio(levels, even, log_means, log_se):
    """Even/odd ratio of normalised means after removing a smooth trend.

    Fits ``log y_b = c0 + c1 b + c2 b^2 + g [b in an even phase]`` by weighted
    least squares and returns ``(exp(g), se(g))``. The standard error is
    inflated by the reduced chi-square when that exceeds one.
    """
    b = np.asarray(levels, dtype=np.float64)
    X = np.column_stack([np.ones_like(b), b, b * b, np.asarray(even, dtype=np.float64)])
    w = 1.0 / np.maximum(np.asarray(log_se, dtype=np.float64), 1e-12) ** 2
    y = np.asarray(log_means, dtype=np.float64)
    A = X.T @ (w[:, None] * X)
    cov = np.linalg.inv(A)
    coef = cov @ (X.T @ (w * y))
    resid = y - X @ coef
    dof = len(y) - X.shape[1]
    chi2 = float(resid @ (w * resid)) / dof if dof > 0 else 1.0
    se = math.sqrt(cov[3, 3] * max(chi2, 1.0))
    return math.exp(coef[3]), se


@dataclass
class OscillationArm:
    label: str
    levels: np.ndarray
    parity: np.ndarray  # 1 for even phase
    normalized_means: np.ndarray
    log_se: np.ndarray
    ratio: float
    log_ratio_se: float


@dataclass
class OscillationResult:
    alpha: float
    center: float
    band: tuple
    control_band: tuple
    schedule: OscillationArm
    control: Optional[OscillationArm]

    @property
    def separation(self) -> float:
        """z-score of log(control ratio) - log(schedule ratio)."""
        if self.control is None:
            return math.nan
        se = math.hypot(self.schedule.log_ratio_se, self.control.log_ratio_se)
        return (math.log(self.control.ratio) - math.log(self.schedule.ratio)) / se

    @property
    def schedule_in_band(self) -> bool:
        return self.band[0] <= self.schedule.ratio <= self.band[1]

    @property
    def control_in_band(self) -> bool:
        return self.control is not None and self.control_band[0] <= self.control.ratio <= self.control_band[1]

    @property
    def passed(self) -> bool:
        return self.schedule_in_band and self.control_in_band and self.separation >= 2.0


def _oscillation_arm(label, spec, sched, levels, alpha, trials, seed, threads):
    d = spec.dimension
    expo = (d - alpha) / d

    def one(b, t):
        n = 2**b
        return alpha_weight(sample_measure(spec, n, trial_rng(seed, n, t)), 0, alpha)

    vals = np.asarray(map_trials(one, [(b, t) for b in levels for t in range(trials)], threads))
    vals = vals.reshape(len(levels), trials) / (2.0 ** np.asarray(levels, float))[:, None] ** expo
    means = vals.mean(axis=1)
    log_se = vals.std(axis=1, ddof=1) / math.sqrt(trials) / means if trials > 1 else np.full(len(levels), 0.01)
    parity = np.array([sched.phase(b) % 2 == 0 for b in levels], dtype=np.int64)
    if parity.min() == parity.max():
        raise ConfigError("oscillation levels must cover both odd and even phases")
    ratio, se = phase_ratio(levels, parity, np.log(means), log_se)
    return OscillationArm(label, np.asarray(levels), parity, means, log_se, ratio, se)


def run_oscillation_experiment(cfg: ExperimentConfig, out=None) -> OscillationResult:
    """Normalised E^0_alpha at rungs n = 2^b, split by the schedule's phase parity.

    A rung n = 2^b resolves level b of the construction. The all-middle-thirds
    schedule of the same depth is run alongside as a control, labelled with the
    same phases.
    """
    spec = cfg.spec
    if spec is None or spec.variant != "nested-schedule":
        raise ConfigError("oscillation needs a nested-schedule [measure]")
    opts = dict(cfg.options)
    if cfg.n_ladder is not None:
        ladder = [int(n) for n in cfg.n_ladder]
        levels = [int(round(math.log2(n))) for n in ladder]
        if any(2**b != n for b, n in zip(levels, ladder)):
            warnings.warn("oscillation ladder is not phase-aligned (n should be powers of 2); "
                          "rounding to the nearest level", stacklevel=2)
    else:
        levels = [int(b) for b in opts.get("levels", OSCILLATION_LEVELS)]
    if len(set(levels)) < 5:
        raise ConfigError("oscillation needs at least 5 distinct levels")
    if max(levels) > spec.schedule.depth:
        raise ConfigError("oscillation levels exceed the schedule depth")
    trials = int(cfg.trials or opts.get("trials", 10))
    if trials < 2:
        raise ConfigError("oscillation needs trials >= 2")
    center = (5 / 7) ** cfg.alpha
    band = (center * float(opts.get("band_lo", 0.8)), center * float(opts.get("band_hi", 1.25)))
    cband = (float(opts.get("control_lo", 0.85)), float(opts.get("control_hi", 1.18)))
    sched = spec.schedule
    arm = _oscillation_arm("schedule", spec, sched, levels, cfg.alpha, trials, cfg.seed, cfg.threads)
    ctl = None
    if opts.get("control", True):
        cspec = MeasureSpec("nested-schedule", depth=sched.depth,
                            schedule=IntervalSchedule.cantor(sched.depth))
        ctl = _oscillation_arm("control", cspec, sched, levels, cfg.alpha, trials, cfg.seed, cfg.threads)
    res = OscillationResult(cfg.alpha, center, band, cband, arm, ctl)
    if out is not None or cfg.out is not None:
        o = _out(cfg, out)
        meta = cfg.meta(alpha=cfg.alpha)
        arms = [a for a in (arm, ctl) if a is not None]
        write_csv(o / "oscillation_rungs.csv",
                  ["measure", "n", "level", "phase", "parity", "mean_normalized", "log_stderr", "trials"],
                  ({"measure": a.label, "n": 2**int(b), "level": int(b), "phase": sched.phase(int(b)),
                    "parity": "even" if p else "odd", "mean_normalized": m, "log_stderr": s,
                    "trials": trials}
                   for a in arms for b, p, m, s in zip(a.levels, a.parity, a.normalized_means, a.log_se)),
                  meta)
        rows = [{"measure": arm.label, "ratio": arm.ratio, "log_stderr": arm.log_ratio_se,
                 "band_lo": band[0], "band_hi": band[1], "in_band": res.schedule_in_band}]
        if ctl is not None:
            rows.append({"measure": ctl.label, "ratio": ctl.ratio, "log_stderr": ctl.log_ratio_se,
                         "band_lo": cband[0], "band_hi": cband[1], "in_band": res.control_in_band})
        write_csv(o / "oscillation_summary.csv",
                  ["measure", "ratio", "log_stderr", "band_lo", "band_hi", "in_band"], rows,
                  cfg.meta(alpha=cfg.alpha, center=center, separation_z=res.separation,
                           passed=res.passed))
    return res


# count scaling ---------------------------------------------------------------


@dataclass
class CountScalingResult:
    n: np.ndarray
    counts: np.ndarray  # (rungs, trials)

    @property
    def mean_over_n(self) -> np.ndarray:
        return self.counts.mean(axis=1) / self.n

    @property
    def var_over_n2(self) -> np.ndarray:
        ddof = 1 if self.counts.shape[1] > 1 else 0
        return self.counts.var(axis=1, ddof=ddof) / self.n**2


def run_count_scaling_experiment(cfg: ExperimentConfig, out=None) -> CountScalingResult:
    """|PH_i| per (n, trial): mean / n and Var / n^2 per rung."""
    if cfg.degree < 1:
        raise ConfigError("count-scaling needs degree >= 1")
    ladder, trials = _ladder(cfg, COUNT_LADDER, 30)
    draw = _sampler(cfg)
    guard = bool(cfg.options.get("guard", True))
    jobs = [(n, t) for n in ladder for t in range(trials)]
    kw = {"guard": guard} if cfg.flavor == "rips" else {}
    counts = map_trials(lambda n, t: interval_count(draw(n, t), cfg.degree, cfg.flavor, **kw),
                        jobs, cfg.threads)
    counts = np.asarray(counts, dtype=np.float64).reshape(len(ladder), trials)
    res = CountScalingResult(np.asarray(ladder, dtype=np.float64), counts)
    if out is not None or cfg.out is not None:
        o = _out(cfg, out)
        meta = cfg.meta(degree=cfg.degree)
        write_csv(o / "count_scaling_trials.csv", ["n", "trial", "count"],
                  ({"n": n, "trial": t, "count": int(counts[a, t])}
                   for a, n in enumerate(ladder) for t in range(trials)), meta)
        write_csv(o / "count_scaling.csv", ["n", "mean_count_over_n", "var_count_over_n2", "trials"],
                  ({"n": n, "mean_count_over_n": res.mean_over_n[a],
                    "var_count_over_n2": res.var_over_n2[a], "trials": trials}
                   for a, n in enumerate(ladder)), meta)
    return res


# occupancy -------------------------------------------------------------------


def run_occupancy_experiment(cfg: ExperimentConfig, out=None) -> list:
    """Occupancy LLN at every n of the ladder (default 10^3, 10^4, 10^5)."""
    opts = dict(cfg.options)
    ladder = [int(n) for n in (cfg.n_ladder or opts.get("n_ladder", [1000, 10_000, 100_000]))]
    trials = int(cfg.trials or opts.get("trials", 50))
    try:
        results = [
            simulate_occupancy_lln(
                OccupancyConfig(float(opts.get("p", 0.5)), float(opts.get("q", 0.3)),
                                int(opts.get("r", 2)), float(opts.get("a", 0.5)), n, trials),
                seed=cfg.seed, threads=cfg.threads)
            for n in ladder
        ]
    except OccupancyError as exc:
        raise ConfigError(str(exc)) from None
    if out is not None or cfg.out is not None:
        o = _out(cfg, out)
        write_csv(o / "occupancy.csv", ["n", "empirical_mean", "analytic_gamma", "stderr", "trials"],
                  (r.row() for r in results), cfg.meta())
    return results


# dimension report ------------------------------------------------------------


def run_dimension_report(cfg: ExperimentConfig, out=None) -> list:
    """PH, box and correlation estimates for one measure or CSV cloud."""
    opts = dict(cfg.options)
    methods = list(opts.get("methods", ["ph", "box", "correlation"]))
    draw = _sampler(cfg)
    reports, rungs = [], []
    if "ph" in methods:
        ladder, trials = _ladder(cfg, *default_ladder(cfg.degree))
        jobs = [(n, t) for n in ladder for t in range(trials)]
        vals = map_trials(lambda n, t: alpha_weight(draw(n, t), cfg.degree, cfg.alpha, cfg.flavor),
                          jobs, cfg.threads)
        vals = np.asarray(vals, dtype=np.float64).reshape(len(ladder), trials)
        var = vals.var(axis=1, ddof=1) if trials > 1 else np.zeros(len(ladder))
        est = fit_ph_dimension(ladder, vals.mean(axis=1), cfg.alpha, var, trials, cfg.degree, cfg.seed)
        reports.append(DimensionReport("ph", est.dim, est.dim_stderr, tuple(ladder), cfg.seed,
                                       cfg.alpha, cfg.degree, est.points))
        rungs = est.points
    big = None
    if "box" in methods or "correlation" in methods:
        if cfg.spec is not None:
            big = sample_measure(cfg.spec, int(opts.get("box_n", 100_000)),
                                 trial_rng(cfg.seed, 0, 0))
        else:
            big = ingest_point_cloud(cfg.csv)
    if "box" in methods:
        reports.append(box_dimension_estimate(big, seed=cfg.seed))
    if "correlation" in methods:
        m = min(len(big), int(opts.get("correlation_n", 10_000)))
        reports.append(correlation_dimension_estimate(big[:m], seed=cfg.seed))
    if out is not None or cfg.out is not None:
        o = _out(cfg, out)
        write_csv(o / "dimension_report.csv",
                  ["method", "estimate", "stderr", "param_alpha", "param_i", "seed"],
                  (r.row() for r in reports), cfg.meta())
        if rungs:
            write_csv(o / "dimension_rungs.csv", ["n", "mean", "variance", "trials"],
                      ({"n": int(p.n), "mean": p.mean, "variance": p.variance, "trials": p.trials}
                       for p in rungs), cfg.meta())
    return reports


RUNNERS = {
    "convergence": run_convergence_experiment,
    "oscillation": run_oscillation_experiment,
    "count-scaling": run_count_scaling_experiment,
    "occupancy": run_occupancy_experiment,
    "dimension-report": run_dimension_report,
}


def run_experiment(cfg: ExperimentConfig, out=None):
    return RUNNERS[cfg.kind](cfg, out)
