import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_linkage
from tkmerge.agglomerate import (
    centroid_dissimilarity,
    cut_tree,
    demp_dissimilarity,
    linkage_merge,
    merge_components,
)
from tkmerge.errors import InputError, KOutOfRange, NonPsdCovariance
from tkmerge.metrics import ari
from tkmerge.model import LINKAGES, ClusterModel, Dendrogram

THREE = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 4.0], [5.0, 4.0, 0.0]])


def _model(centroids, covs=None, weights=None):
    c = np.asarray(centroids, dtype=float)
    k, p = c.shape
    covs = np.tile(np.eye(p), (k, 1, 1)) if covs is None else np.asarray(covs, dtype=float)
    w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
    return ClusterModel(c, covs, np.full(k, 10), w)


def _random_dissimilarity(rng, k, integer=False):
    a = rng.integers(1, 4, (k, k)).astype(float) if integer else rng.uniform(0.1, 10, (k, k))
    d = np.triu(a, 1)
    return d + d.T


def _as_tuples(dend):
    return [(m.left, m.right, m.height) for m in dend.merges]


def test_centroid_distances():
    assert centroid_dissimilarity(_model([[0, 0], [3, 4]])).d[0, 1] == 5.0
    np.testing.assert_array_equal(centroid_dissimilarity(_model([[1, 1], [1, 1]])).d, np.zeros((2, 2)))
    d = centroid_dissimilarity(_model([[0, 0], [1, 0], [0, 2]])).d
    np.testing.assert_allclose(d, [[0, 1, 2], [1, 0, np.sqrt(5)], [2, np.sqrt(5), 0]], atol=1e-15)


def test_centroid_needs_two():
    with pytest.raises(InputError):
        centroid_dissimilarity(_model([[0, 0]]))


def test_three_node_single_and_complete():
    single = linkage_merge(THREE, "single")
    # the node holding the smaller leaf id is listed first
    assert _as_tuples(single) == [(0, 1, 1.0), (3, 2, 4.0)]
    assert [m.new for m in single.merges] == [3, 4]
    assert linkage_merge(THREE, "complete").merges[1].height == 5.0
    assert linkage_merge(THREE, "average").merges[1].height == 4.5


def test_cut_examples():
    dend = linkage_merge(THREE, "single")
    np.testing.assert_array_equal(cut_tree(dend, 3), [1, 2, 3])
    np.testing.assert_array_equal(cut_tree(dend, 1), [1, 1, 1])
    np.testing.assert_array_equal(cut_tree(dend, 2), [1, 1, 2])
    for bad in (0, 4):
        with pytest.raises(KOutOfRange):
            cut_tree(dend, bad)


@pytest.mark.parametrize("linkage", LINKAGES)
def test_matches_naive_oracle(rng, linkage):
    for _ in range(50):
        k = int(rng.integers(2, 8))
        d = _random_dissimilarity(rng, k)
        got = _as_tuples(linkage_merge(d, linkage))
        ref = naive_linkage(d, linkage)
        assert [g[:2] for g in got] == [r[:2] for r in ref]
        np.testing.assert_allclose([g[2] for g in got], [r[2] for r in ref], rtol=1e-12)


@pytest.mark.parametrize("linkage", ["single", "complete"])
def test_matches_naive_oracle_with_ties(rng, linkage):
    for _ in range(50):
        k = int(rng.integers(2, 8))
        d = _random_dissimilarity(rng, k, integer=True)
        assert _as_tuples(linkage_merge(d, linkage)) == naive_linkage(d, linkage)


def test_single_heights_non_decreasing(rng):
    for _ in range(30):
        d = _random_dissimilarity(rng, 7)
        assert np.all(np.diff(linkage_merge(d, "single").heights) >= 0)


@given(st.integers(0, 10**6), st.floats(0.01, 100.0), st.sampled_from(LINKAGES), st.integers(1, 6))
def test_cut_invariant_to_scaling(seed, c, linkage, K):
    d = _random_dissimilarity(np.random.default_rng(seed), 6)
    a = linkage_merge(d, linkage)
    b = linkage_merge(c * d, linkage)
    np.testing.assert_array_equal(cut_tree(a, K), cut_tree(b, K))
    np.testing.assert_allclose(b.heights, c * a.heights, rtol=1e-12)


@given(st.integers(0, 10**6), st.permutations(range(6)), st.sampled_from(LINKAGES), st.integers(1, 6))
def test_permutation_equivariance(seed, perm, linkage, K):
    d = _random_dissimilarity(np.random.default_rng(seed), 6)
    perm = np.array(perm)
    g = cut_tree(linkage_merge(d, linkage), K)
    gp = cut_tree(linkage_merge(d[np.ix_(perm, perm)], linkage), K)
    assert ari(gp, g[perm]) == 1.0


def test_dendrogram_text_round_trip(rng):
    dend = linkage_merge(_random_dissimilarity(rng, 5), "average")
    back = Dendrogram.from_text(dend.to_text(), "average")
    assert [(m.left, m.right, m.new) for m in back.merges] == [(m.left, m.right, m.new) for m in dend.merges]
    np.testing.assert_allclose(back.heights, dend.heights, rtol=1e-11)


def test_demp_identical_vs_disjoint():
    same = demp_dissimilarity(_model([[0, 0], [0, 0]]), n_mc=2000, seed=1).d[0, 1]
    apart = demp_dissimilarity(_model([[0, 0], [100, 0]]), n_mc=2000, seed=1).d[0, 1]
    assert apart >= 1 - 1e-3
    assert same < apart - 0.3
    # identical components: every draw is an exact tie, counted as 1/2
    assert same == pytest.approx(0.5)


def test_demp_deterministic_and_zero_diagonal():
    m = _model([[0, 0], [1.5, 0], [0, 2]], weights=[0.5, 0.3, 0.2])
    a = demp_dissimilarity(m, n_mc=1000, seed=9).d
    np.testing.assert_array_equal(a, demp_dissimilarity(m, n_mc=1000, seed=9).d)
    assert np.all(np.diag(a) == 0) and np.array_equal(a, a.T)
    assert not np.array_equal(a, demp_dissimilarity(m, n_mc=1000, seed=10).d)


def test_demp_argument_errors():
    with pytest.raises(InputError):
        demp_dissimilarity(_model([[0, 0], [1, 1]]), n_mc=999)
    bad = np.array([np.eye(2), [[1.0, 0.0], [0.0, -1.0]]])
    with pytest.raises(NonPsdCovariance):
        demp_dissimilarity(_model([[0, 0], [1, 1]], covs=bad), n_mc=1000)


def test_demp_handles_singular_covariance():
    covs = np.array([np.diag([1.0, 0.0]), np.eye(2)])
    d = demp_dissimilarity(_model([[0, 0], [50, 0]], covs=covs), n_mc=1000).d
    assert d[0, 1] >= 1 - 1e-3


def test_merge_components_groups():
    m = _model([[0, 0], [1, 0], [20, 0], [21, 0]])
    res = merge_components(m, 2)
    np.testing.assert_array_equal(res.component_to_group, [1, 1, 2, 2])
    assert res.n_groups == 2
    np.testing.assert_array_equal(merge_components(m, 2, metric="demp_mc", n_mc=1000).component_to_group,
                                  [1, 1, 2, 2])
    single = merge_components(_model([[0, 0]]), 1)
    np.testing.assert_array_equal(single.component_to_group, [1])
    with pytest.raises(InputError):
        merge_components(m, 2, metric="manhattan")
    with pytest.raises(InputError):
        linkage_merge(THREE, "ward")
