import math
import warnings

import numpy as np
import pytest

from phdim.cli import main
from phdim.experiments import (
    ExperimentConfig,
    phase_ratio,
    run_convergence_experiment,
    run_count_scaling_experiment,
    run_dimension_report,
    run_occupancy_experiment,
    run_oscillation_experiment,
)
from phdim.io import ConfigError, read_comments, write_point_cloud
from phdim.samplers import MeasureSpec, sample_measure


def cfg(kind, measure=None, **exp):
    raw = {"experiment": {"kind": kind, **exp}}
    if measure is not None:
        raw["measure"] = measure
    return ExperimentConfig.from_dict(raw)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError, match="kind"):
        cfg("bogus", {"variant": "torus"})
    with pytest.raises(ConfigError, match="measure"):
        cfg("convergence")
    with pytest.raises(ConfigError, match="unknown"):
        cfg("convergence", {"variant": "torus"}, colour="red")
    with pytest.raises(ConfigError):
        cfg("convergence", {"variant": "torus", "R": 0.5})
    with pytest.raises(ConfigError, match="alpha"):
        cfg("convergence", {"variant": "torus"}, alpha=-1)


def test_missing_d_for_csv(tmp_path):
    p = write_point_cloud(tmp_path / "c.csv", np.random.default_rng(0).random((500, 2)))
    c = cfg("convergence", {"csv": str(p)}, n_ladder=[50, 100, 200, 400], trials=2)
    with pytest.raises(ConfigError, match="missing d"):
        run_convergence_experiment(c)
    c = cfg("convergence", {"csv": str(p), "dim": 2}, n_ladder=[50, 100, 200, 400], trials=2)
    r = run_convergence_experiment(c, tmp_path / "out")
    assert r.values.shape == (4, 2)
    c = cfg("convergence", {"csv": str(p), "dim": 2}, n_ladder=[600], trials=1)
    with pytest.raises(ConfigError, match="exceeds"):
        run_convergence_experiment(c)


def test_convergence_outputs(tmp_path):
    c = cfg("convergence", {"variant": "cantor-middle-thirds"}, alpha=0.5,
            n_ladder=[256, 512, 1024, 2048], trials=4, seed=3)
    r = run_convergence_experiment(c, tmp_path)
    d = math.log(2) / math.log(3)
    np.testing.assert_allclose(r.normalized, r.values / r.n[:, None] ** ((d - 0.5) / d))
    meta = read_comments(tmp_path / "convergence_trials.csv")
    assert meta["seed"] == "3" and len(meta["config_hash"]) == 64
    body = (tmp_path / "convergence_summary.csv").read_text().splitlines()
    assert "n,mean,variance,normalized_mean,normalized_variance,trials" in body


def test_threads_do_not_change_bytes(tmp_path):
    base = dict(n_ladder=[64, 128, 256, 512], trials=3, seed=1)
    run_convergence_experiment(cfg("convergence", {"variant": "torus"}, **base), tmp_path / "a")
    run_convergence_experiment(cfg("convergence", {"variant": "torus"}, threads=4, **base), tmp_path / "b")
    for name in ("convergence_trials.csv", "convergence_summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_experiment_reproducible(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('[experiment]\nkind = "count-scaling"\ndegree = 1\nn_ladder = [20, 40]\n'
                    'trials = 3\nseed = 5\n[measure]\nvariant = "stacked-tori"\n')
    for out in ("r1", "r2"):
        assert main(["experiment", "count-scaling", "--config", str(toml), "--out", str(tmp_path / out)]) == 0
    a = (tmp_path / "r1" / "count_scaling.csv").read_bytes()
    assert a == (tmp_path / "r2" / "count_scaling.csv").read_bytes()
    assert main(["experiment", "convergence", "--config", str(toml)]) == 2


def test_count_scaling_small_and_guard():
    r = run_count_scaling_experiment(cfg("count-scaling", {"variant": "torus"}, degree=1,
                                         n_ladder=[2, 2], trials=5))
    assert np.all(r.counts == 0)
    with pytest.raises(ConfigError):
        run_count_scaling_experiment(cfg("count-scaling", {"variant": "torus"}, degree=0))
    from phdim.persistence import ResourceGuardError

    with pytest.raises(ResourceGuardError):
        run_count_scaling_experiment(cfg("count-scaling", {"variant": "torus"}, degree=2,
                                         n_ladder=[500], trials=1))


def test_phase_ratio_recovers_injected_step():
    b = np.arange(6, 22)
    even = ((b // 4) % 2 == 1).astype(int)
    y = 0.3 + 0.01 * b - 0.0004 * b**2 + math.log(0.8) * even
    ratio, se = phase_ratio(b, even, y, np.full(len(b), 0.01))
    assert ratio == pytest.approx(0.8, rel=1e-9)


def test_oscillation_warns_and_validates(tmp_path):
    with pytest.raises(ConfigError):
        run_oscillation_experiment(cfg("oscillation", {"variant": "torus"}))
    c = cfg("oscillation", {"variant": "nested-schedule", "depth": 16},
            n_ladder=[2**b + 1 for b in range(5, 13)], trials=2)
    with pytest.warns(UserWarning, match="phase-aligned"):
        r = run_oscillation_experiment(c, tmp_path)
    assert r.control is not None and r.schedule.ratio > 0
    text = (tmp_path / "oscillation_summary.csv").read_text()
    assert "measure,ratio,log_stderr,band_lo,band_hi,in_band" in text
    assert "# seed=0" in text


def test_occupancy_kind(tmp_path):
    res = run_occupancy_experiment(cfg("occupancy", n_ladder=[1000, 5000], trials=5), tmp_path)
    assert [r.n for r in res] == [1000, 5000]
    assert "n,empirical_mean,analytic_gamma,stderr,trials" in (tmp_path / "occupancy.csv").read_text()
    with pytest.raises(ConfigError):
        run_occupancy_experiment(ExperimentConfig.from_dict(
            {"experiment": {"kind": "occupancy"}, "occupancy": {"a": 5.0}}))


def test_dimension_report(tmp_path):
    c = cfg("dimension-report", {"variant": "uniform-cube", "m": 2}, n_ladder=[128, 256, 512, 1024],
            trials=3)
    c.options.update(box_n=20_000, correlation_n=3000)
    reps = run_dimension_report(c, tmp_path)
    assert [r.method for r in reps] == ["ph", "box", "correlation"]
    assert all(abs(r.estimate - 2) < 0.3 for r in reps)
    assert (tmp_path / "dimension_rungs.csv").read_text().count("\n") == 4 + 4


def _normalized_means(measure, **exp):
    return run_convergence_experiment(cfg("convergence", measure, **exp)).normalized_means


def test_convergence_cantor_band():
    nm = _normalized_means({"variant": "cantor-middle-thirds"}, alpha=0.5)
    assert nm.max() / nm.min() <= 3


def test_convergence_uniform_square_settles():
    nm = _normalized_means({"variant": "uniform-cube", "m": 2}, alpha=1.0)
    assert abs(nm[-1] / nm[-2] - 1) <= 0.15


def test_convergence_sierpinski_ph1_band():
    nm = _normalized_means({"variant": "sierpinski-triangle"}, alpha=1.0, degree=1)
    assert nm.max() / nm.min() <= 4


def test_count_scaling_stacked_tori_variance_decreases():
    r = run_count_scaling_experiment(cfg("count-scaling", {"variant": "stacked-tori"}, degree=1, trials=10))
    assert int(np.sum(np.diff(r.var_over_n2) < 0)) >= 3
