"""Command-line entry point ``phdim``.

Exit codes: 0 success, 2 bad input or configuration, 3 resource guard tripped.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .estimators import (
    DimensionReport,
    EstimatorError,
    box_dimension_estimate,
    correlation_dimension_estimate,
    ph_dimension_estimate,
    trial_rng,
)
from .experiments import KINDS, ExperimentConfig, run_experiment
from .geometry import EmptyInputError
from .io import (
    ConfigError,
    config_hash,
    ingest_point_cloud,
    load_config,
    write_barcode,
    write_csv,
    write_edges,
    write_point_cloud,
)
from .mst import euclidean_mst
from .occupancy import OccupancyConfig, OccupancyError, simulate_occupancy_lln
from .persistence import FiltrationError, ResourceGuardError, persistence_barcode
from .samplers import MeasureSpec, ScheduleError, sample_measure

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3


def _value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _measure(args):
    """MeasureSpec from ``--config`` [measure] table and/or ``--measure``/``--param``."""
    table, h = {}, None
    if args.config:
        raw, h = load_config(args.config)
        table = dict(raw.get("measure", {}))
    if args.measure:
        table["variant"] = args.measure
    for kv in args.param or []:
        if "=" not in kv:
            raise ConfigError(f"--param expects key=value, got {kv!r}")
        k, v = kv.split("=", 1)
        table[k.strip()] = _value(v.strip())
    table.pop("dim", None)
    if not table:
        raise ConfigError("no measure given: use --measure or a config with [measure]")
    try:
        spec = MeasureSpec.from_dict(table)
    except (ValueError, ScheduleError) as exc:
        raise ConfigError(f"invalid measure: {exc}") from None
    return spec, h or config_hash({"measure": spec.to_dict()})


def _out(args, default):
    return Path(args.out) if args.out else Path(default)


def cmd_sample(args):
    spec, h = _measure(args)
    x = sample_measure(spec, args.n, trial_rng(args.seed, args.n, 0))
    p = write_point_cloud(_out(args, "sample.csv"), x, {"config_hash": h, "seed": args.seed})
    print(p)


def cmd_mst(args):
    x = ingest_point_cloud(args.input)
    tree = euclidean_mst(x, metric=args.metric)
    p = write_edges(_out(args, "mst.csv"), tree.lengths,
                    {"config_hash": config_hash({"input": str(args.input)}), "seed": args.seed})
    print(p)


def cmd_ph(args):
    x = ingest_point_cloud(args.input)
    kw = {}
    if args.max_scale is not None:
        kw["max_scale"] = args.max_scale
    if args.flavor == "rips" and args.no_guard:
        kw["guard"] = False
    b = persistence_barcode(x, args.flavor, max_degree=args.degree, **kw)
    p = write_barcode(_out(args, "barcode.csv"), b,
                      {"config_hash": config_hash({"input": str(args.input), "flavor": args.flavor}),
                       "seed": args.seed})
    print(p)


def cmd_estimate(args):
    meta = {"seed": args.seed}
    if args.input:
        if args.method == "ph":
            raise ConfigError("the ph method needs a sampler (--measure or --config), not --input")
        cloud = ingest_point_cloud(args.input)
        meta["config_hash"] = config_hash({"input": str(args.input)})
    else:
        spec, meta["config_hash"] = _measure(args)
        cloud = None
    if args.method == "ph":
        ladder = [int(v) for v in args.n_ladder.split(",")] if args.n_ladder else None
        est = ph_dimension_estimate(spec, args.degree, args.alpha, ladder, args.trials, args.seed,
                                    args.threads)
        rep = DimensionReport("ph", est.dim, est.dim_stderr, tuple(p.n for p in est.points),
                              args.seed, args.alpha, args.degree, est.points)
    else:
        if cloud is None:
            cloud = sample_measure(spec, args.n, trial_rng(args.seed, args.n, 0))
        fn = box_dimension_estimate if args.method == "box" else correlation_dimension_estimate
        rep = fn(cloud, seed=args.seed)
    write_csv(_out(args, "estimate.csv"), ["method", "estimate", "stderr", "param_alpha", "param_i", "seed"],
              [rep.row()], meta)
    print(f"{rep.method} {rep.estimate:.6g} +/- {rep.stderr:.3g}")


def cmd_experiment(args):
    if not args.config:
        raise ConfigError("experiment needs --config")
    raw, h = load_config(args.config)
    raw.setdefault("experiment", {})
    if raw["experiment"].get("kind", args.kind) != args.kind:
        raise ConfigError(f"config kind {raw['experiment']['kind']!r} does not match {args.kind!r}")
    raw["experiment"]["kind"] = args.kind
    if args.seed is not None:
        raw["experiment"]["seed"] = args.seed
    if args.threads is not None:
        raw["experiment"]["threads"] = args.threads
    cfg = ExperimentConfig.from_dict(raw, h, base_dir=Path(args.config).parent)
    out = Path(args.out) if args.out else (cfg.out or Path("results"))
    run_experiment(cfg, out)
    print(out)


def cmd_occupancy(args):
    try:
        cfg = OccupancyConfig(args.p, args.q, args.r, args.a, args.n, args.trials)
    except OccupancyError as exc:
        raise ConfigError(str(exc)) from None
    res = simulate_occupancy_lln(cfg, args.seed, args.threads)
    h = config_hash({"p": args.p, "q": args.q, "r": args.r, "a": args.a, "n": args.n, "trials": args.trials})
    write_csv(_out(args, "occupancy.csv"), ["n", "empirical_mean", "analytic_gamma", "stderr", "trials"],
              [res.row()], {"config_hash": h, "seed": args.seed})
    print(f"Y_n {res.empirical_mean:.6g} gamma {res.analytic_gamma:.6g} se {res.stderr:.2g}")


def _common(p, seed_default=0):
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", help="output CSV (or directory for experiment)")
    p.add_argument("--threads", type=int, default=None if seed_default is None else 1)


def _measure_args(p):
    p.add_argument("--config", help="TOML file with a [measure] table")
    p.add_argument("--measure", help="measure variant name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="measure parameter (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phdim", description="Persistent-homology fractal dimension tools")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a measure to CSV")
    _measure_args(p)
    p.add_argument("--n", type=int, required=True)
    _common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("mst", help="MST edge lengths of a point-cloud CSV")
    p.add_argument("input")
    p.add_argument("--metric", choices=("euclidean", "chebyshev"), default="euclidean")
    _common(p)
    p.set_defaults(fn=cmd_mst)

    p = sub.add_parser("ph", help="persistence barcode of a point-cloud CSV")
    p.add_argument("input")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--flavor", choices=("rips", "cech"), default="rips")
    p.add_argument("--max-scale", type=float, default=None)
    p.add_argument("--no-guard", action="store_true", help="disable the size guard")
    _common(p)
    p.set_defaults(fn=cmd_ph)

    p = sub.add_parser("estimate", help="dimension estimate (ph, box or correlation)")
    _measure_args(p)
    p.add_argument("--input", help="point-cloud CSV (box and correlation only)")
    p.add_argument("--method", choices=("ph", "box", "correlation"), default="ph")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-ladder", help="comma-separated sample sizes")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--n", type=int, default=100_000, help="cloud size for box/correlation")
    _common(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("experiment", help="run a config-driven experiment")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True)
    _common(p, seed_default=None)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("occupancy", help="occupancy law-of-large-numbers simulation")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=50)
    _common(p)
    p.set_defaults(fn=cmd_occupancy)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and args.command != "experiment":
        args.threads = 1
    try:
        args.fn(args)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, EmptyInputError, EstimatorError, FiltrationError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
