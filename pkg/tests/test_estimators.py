import math

import numpy as np
import pytest

from phdim.estimators import (
    EstimatorError,
    ahlfors_regularity_diagnostic,
    alpha_weight,
    box_dimension_estimate,
    correlation_dimension_estimate,
    fit_ph_dimension,
    ph_dimension_estimate,
    trial_rng,
    map_trials,
)
from phdim.samplers import MeasureSpec, sample_measure

CANTOR_D = math.log(2) / math.log(3)
LADDER = [256, 512, 1024, 2048]


def test_constant_statistic_gives_alpha():
    est = fit_ph_dimension(LADDER, [3.0] * 4, alpha=0.7)
    assert est.beta == pytest.approx(0.0, abs=1e-12)
    assert est.dim == pytest.approx(0.7)


def test_formula_and_rescaling():
    ns = np.array(LADDER, float)
    means = 5.0 * ns**0.25
    a = fit_ph_dimension(ns, means, 1.0)
    b = fit_ph_dimension(ns, 1e-3 * means, 1.0)
    assert a.beta == pytest.approx(0.25)
    assert a.dim == pytest.approx(1.0 / (1 - a.beta))
    assert b.dim == pytest.approx(a.dim, rel=1e-12)
    assert len(a.points) == 4


def test_divergent_and_degenerate():
    with pytest.raises(EstimatorError, match="estimator divergent"):
        fit_ph_dimension(LADDER, np.array(LADDER, float), 1.0)
    with pytest.raises(EstimatorError, match="degenerate"):
        fit_ph_dimension([10, 10, 20, 20], [1, 1, 2, 2], 1.0)
    with pytest.raises(EstimatorError):
        fit_ph_dimension(LADDER, [1, 2, 3, 4], 0.0)


def test_alpha_weight_paths_agree():
    x = sample_measure(MeasureSpec("cantor-middle-thirds"), 500, seed=0)
    line = alpha_weight(x, 0, 0.5)
    plane = alpha_weight(np.column_stack([x, np.zeros(len(x))]), 0, 0.5)
    assert line == pytest.approx(plane, rel=1e-12)
    assert alpha_weight(x, 0, 0.5, "cech") == pytest.approx(line * 0.5**0.5)


def test_trial_rng_is_order_free():
    a = trial_rng(7, 128, 3).random(4)
    trial_rng(7, 128, 2).random(4)
    assert np.array_equal(a, trial_rng(7, 128, 3).random(4))
    assert not np.array_equal(a, trial_rng(7, 256, 3).random(4))
    jobs = [(n, t) for n in (64, 128) for t in range(4)]
    f = lambda n, t: float(trial_rng(1, n, t).random())
    assert map_trials(f, jobs, 1) == map_trials(f, jobs, 4)


def test_ph_uniform_square():
    est = ph_dimension_estimate(MeasureSpec("uniform-cube", m=2), 0, 1.0, seed=1)
    assert est.dim == pytest.approx(2.0, abs=0.1)


def test_ph_estimate_deterministic():
    spec = MeasureSpec("sierpinski-triangle")
    a = ph_dimension_estimate(spec, 0, 1.0, LADDER, 3, seed=5)
    b = ph_dimension_estimate(spec, 0, 1.0, LADDER, 3, seed=5, threads=3)
    assert a.dim == b.dim and a.stderr == b.stderr


def test_box_examples():
    sq = sample_measure(MeasureSpec("uniform-cube", m=2), 100_000, seed=0)
    assert box_dimension_estimate(sq).estimate == pytest.approx(2.0, abs=0.1)
    ca = sample_measure(MeasureSpec("cantor-middle-thirds"), 100_000, seed=0)
    assert box_dimension_estimate(ca).estimate == pytest.approx(CANTOR_D, abs=0.05)
    assert box_dimension_estimate([[0.3, 0.4]]).estimate == 0.0
    with pytest.raises(EstimatorError):
        box_dimension_estimate(sq, [0.1, 0.1, 0.1, 0.1])


def test_correlation_examples():
    sq = sample_measure(MeasureSpec("uniform-cube", m=2), 10_000, seed=0)
    assert correlation_dimension_estimate(sq).estimate == pytest.approx(2.0, abs=0.1)
    ca = sample_measure(MeasureSpec("cantor-middle-thirds"), 10_000, seed=0)
    assert correlation_dimension_estimate(ca).estimate == pytest.approx(CANTOR_D, abs=0.05)
    two = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert correlation_dimension_estimate(two, [0.1, 0.2, 0.4, 0.8]).estimate == 0.0
    with pytest.raises(EstimatorError, match="coincident"):
        correlation_dimension_estimate(np.zeros((5, 2)))
    a = correlation_dimension_estimate(sq, seed=3)
    assert a == correlation_dimension_estimate(sq, seed=3)


def test_ahlfors_uniform_interval():
    r = ahlfors_regularity_diagnostic(MeasureSpec("uniform-cube", m=1), 1.0)
    assert 0.4 <= r.min_ratio and r.max_ratio <= 2.5
    assert r.verdict == "regular-consistent"


def test_ahlfors_counterexample_bound():
    spec = MeasureSpec("nested-schedule")
    d = spec.dimension
    r = ahlfors_regularity_diagnostic(spec, d)
    assert r.max_ratio <= 2 * 4 * 3**d
    assert r.min_ratio >= 3**-d / 2


def test_ahlfors_wrong_dimension():
    r = ahlfors_regularity_diagnostic(MeasureSpec("cantor-middle-thirds"), 0.9)
    med = np.median(r.ratios, axis=0)
    assert np.all(np.diff(med) > 0)
    assert r.verdict == "inconsistent"


def test_ahlfors_underpowered():
    with pytest.raises(EstimatorError, match="underpowered"):
        ahlfors_regularity_diagnostic(MeasureSpec("uniform-cube", m=2), 2.0, n=1000)
