import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_mst_weight, count_components
from phdim.geometry import pairwise_distances
from phdim.mst import (
    ZeroLengthEdgeWarning,
    euclidean_mst,
    minimum_spanning_tree,
    mst_alpha_weight,
    mst_edges_exceeding,
)

small_clouds = st.integers(1, 3).flatmap(
    lambda m: arrays(np.float64, st.tuples(st.integers(1, 25), st.just(m)),
                     elements=st.floats(-10, 10, allow_nan=False, width=32))
)


def test_examples():
    assert minimum_spanning_tree(pairwise_distances([0.0, 1.0, 3.0])).lengths.tolist() == [1, 2]
    sq = pairwise_distances([[0, 0], [1, 0], [0, 1], [1, 1]])
    assert minimum_spanning_tree(sq).lengths.tolist() == [1, 1, 1]
    assert len(minimum_spanning_tree([[0.0]])) == 0
    assert len(euclidean_mst([[3.0, 1.0]])) == 0


def test_weight_and_exceeding_examples():
    t = minimum_spanning_tree(pairwise_distances([0.0, 1.0, 3.0]))
    assert mst_alpha_weight(t, 2) == 5
    assert mst_alpha_weight(t, 1) == 3
    sq = minimum_spanning_tree(pairwise_distances([[0, 0], [1, 0], [0, 1], [1, 1]]))
    assert mst_alpha_weight(sq, 0.5) == 3
    assert mst_edges_exceeding(t, 1.5) == 1
    assert mst_edges_exceeding(t, 0) == 2
    assert mst_edges_exceeding(t, 2) == 0
    with pytest.raises(ValueError):
        mst_alpha_weight(t, 0)


def test_kruskal_tie_break_is_lexicographic():
    t = minimum_spanning_tree(pairwise_distances([[0, 0], [1, 0], [0, 1], [1, 1]]))
    assert t.edges.tolist() == [[0, 1], [0, 2], [1, 3]]


def test_duplicates_warn():
    with pytest.warns(ZeroLengthEdgeWarning):
        t = euclidean_mst([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    assert t.lengths.tolist() == [0.0, 1.0]


@settings(max_examples=80, deadline=None)
@given(small_clouds)
def test_prim_and_kruskal_agree(x):
    d = pairwise_distances(x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroLengthEdgeWarning)
        k = minimum_spanning_tree(d).lengths
        p = euclidean_mst(x).lengths
    assert len(k) == len(x) - 1
    np.testing.assert_allclose(np.sort(p), k, rtol=1e-12, atol=1e-12)
    assert k.sum() == pytest.approx(brute_mst_weight(d), rel=1e-12, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(small_clouds, st.floats(0.0, 25.0))
def test_component_identity(x, eps):
    d = pairwise_distances(x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroLengthEdgeWarning)
        t = minimum_spanning_tree(d)
    if eps > 0 and not np.any(t.lengths == eps):
        assert mst_edges_exceeding(t, eps) == count_components(d, eps) - 1
    # at an edge length the strict graph loses that edge; the closed graph matches
    for e in t.lengths[:3]:
        assert mst_edges_exceeding(t, e) == count_components(d, e, strict=False) - 1


def test_invariance_under_permutation_and_isometry():
    rng = np.random.default_rng(5)
    x = rng.random((60, 3))
    w = mst_alpha_weight(euclidean_mst(x), 1.0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    y = x[rng.permutation(60)] @ q.T + rng.normal(size=3)
    assert mst_alpha_weight(euclidean_mst(y), 1.0) == pytest.approx(w, rel=1e-12)


def test_chebyshev_metric():
    x = np.random.default_rng(2).random((30, 2))
    k = minimum_spanning_tree(pairwise_distances(x, "chebyshev")).lengths
    np.testing.assert_allclose(np.sort(euclidean_mst(x, "chebyshev").lengths), k, rtol=1e-13)


def test_longest_edge_scaling_uniform_square():
    ratios = []
    for b in range(8, 14):
        n = 2**b
        longest = [euclidean_mst(np.random.default_rng([b, t]).random((n, 2))).lengths[-1]
                   for t in range(5)]
        ratios.append(np.mean(longest) / math.sqrt(math.log(n) / n))
    assert max(ratios) / min(ratios) <= 4
