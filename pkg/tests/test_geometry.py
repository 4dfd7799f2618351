import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phdim.geometry import EmptyInputError, count_scale, hausdorff_distance, pairwise_distances
from phdim.samplers import MeasureSpec, sample_measure

clouds = st.integers(1, 3).flatmap(
    lambda m: arrays(np.float64, st.tuples(st.integers(1, 12), st.just(m)),
                     elements=st.floats(-100, 100, allow_nan=False))
)


def test_distance_examples():
    np.testing.assert_allclose(pairwise_distances([[0, 0], [3, 4]]), [[0, 5], [5, 0]])
    assert pairwise_distances([[1, 1]]).tolist() == [[0.0]]
    tri = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    d = pairwise_distances(tri)
    np.testing.assert_allclose(d[~np.eye(3, dtype=bool)], 1.0, rtol=1e-15)


def test_chebyshev():
    np.testing.assert_allclose(pairwise_distances([[0, 0], [3, 4]], "chebyshev"), [[0, 4], [4, 0]])


@pytest.mark.parametrize("bad", [np.empty((0, 2)), [], [[np.nan, 1.0]], [[np.inf]]])
def test_distance_rejects(bad):
    with pytest.raises(ValueError):
        pairwise_distances(bad)


def test_empty_message():
    with pytest.raises(EmptyInputError, match="empty input"):
        pairwise_distances(np.empty((0, 3)))


@settings(max_examples=60, deadline=None)
@given(clouds)
def test_distance_matrix_is_metric(x):
    for metric in ("euclidean", "chebyshev"):
        d = pairwise_distances(x, metric)
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0) and np.all(d >= 0)
        # d[i,k] <= d[i,j] + d[j,k]
        lhs = d[:, None, :]
        rhs = d[:, :, None] + d[None, :, :]
        assert np.all(lhs <= rhs + 1e-9 * (1 + rhs))


def test_hausdorff_examples():
    assert hausdorff_distance([0.0], [1.0]) == 1.0
    a = np.random.default_rng(0).random((5, 2))
    assert hausdorff_distance(a, a) == 0.0
    assert hausdorff_distance([0.0, 1.0], [0.0]) == 1.0


def test_hausdorff_errors():
    with pytest.raises(ValueError, match="dimension mismatch"):
        hausdorff_distance(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(EmptyInputError):
        hausdorff_distance(np.empty((0, 2)), np.zeros((1, 2)))


@settings(max_examples=60, deadline=None)
@given(clouds, st.data())
def test_hausdorff_symmetric_and_zero_iff_equal_sets(a, data):
    b = data.draw(arrays(np.float64, st.tuples(st.integers(1, 12), st.just(a.shape[1])),
                         elements=st.floats(-100, 100, allow_nan=False)))
    assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
    perm = a[np.random.default_rng(0).permutation(len(a))]
    assert hausdorff_distance(a, np.vstack([perm, a[:1]])) == 0.0
    same = {tuple(r) for r in a} == {tuple(r) for r in b}
    assert (hausdorff_distance(a, b) == 0.0) == same


def test_count_scale_examples():
    assert count_scale([0.0, 1.0], 0.4, "disjoint-balls").count == 2
    assert count_scale([[0, 0], [0.5, 0.5]], 1.0, "grid-boxes").count == 1


def test_count_scale_cantor_grid():
    # the 16 level-4 intervals each sit inside one mesh-3^-4 cube; straddling adds at most 2
    x = sample_measure(MeasureSpec("cantor-middle-thirds", depth=8), 4096, seed=0)
    c = count_scale(x, 3.0**-4, "grid-boxes").count
    assert 14 <= c <= 18


def test_count_scale_threshold_and_errors():
    x = np.array([[0.1], [0.15], [0.7]])
    assert count_scale(x, 0.5, "grid-boxes-threshold", mass_threshold=0.0, dim=1).count == 2
    # cube [0, .5) holds 2/3 of the mass, cube [.5, 1) holds 1/3
    assert count_scale(x, 0.5, "grid-boxes-threshold", mass_threshold=1.0, dim=1).count == 1
    with pytest.raises(ValueError):
        count_scale(x, 0.0)
    with pytest.raises(ValueError):
        count_scale(x, 0.5, "grid-boxes-threshold")
    with pytest.raises(ValueError):
        count_scale(x, 0.5, "nope")


def test_boundary_points_floor_convention():
    # 0.5 lies on a cube boundary and belongs to the cube [0.5, 1)
    assert count_scale([[0.5], [0.9]], 0.5).count == 1


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 3)),
              elements=st.floats(0, 10, allow_nan=False)))
def test_grid_count_monotone_on_dyadic_ladder(x):
    counts = [count_scale(x, 2.0**-k).count for k in range(-3, 6)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_greedy_packing_is_maximal_and_seeded():
    x = np.random.default_rng(1).random((300, 2))
    delta = 0.05
    a = count_scale(x, delta, "disjoint-balls", seed=3).count
    assert a == count_scale(x, delta, "disjoint-balls", seed=3).count
    # a maximal packing of 2*delta-separated centres needs at least
    # area / (pi (2 delta)^2) of them to cover the samples
    assert a >= 1.0 / (math.pi * (2 * delta) ** 2) * 0.5


def test_cantor_box_counts_track_dimension():
    x = sample_measure(MeasureSpec("cantor-middle-thirds"), 100_000, seed=0)
    d = math.log(2) / math.log(3)
    for k in range(2, 8):
        c = count_scale(x, 3.0**-k).count
        assert abs(math.log(c) / (k * math.log(3)) - d) <= 0.1
