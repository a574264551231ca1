import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.cluster import hierarchy
from scipy.spatial.distance import pdist

from multidendro import MethodSpec, ProximityMatrix, cluster, cophenetic_matrix, naive_cluster
from multidendro.engine import tie_components
from multidendro.tree import canonical, trees_equal

from conftest import euclidean_matrix, random_matrix
from test_linkage import ALL_SPECS

seeds = st.integers(0, 2**32 - 1)


def test_toy_multidendrogram(toy):
    d = cluster(toy, "arithmetic", group="variable")
    root = d.root
    assert root.height == 5 and root.interval == (5, 5)
    sub, leaf = sorted(root.children, key=lambda c: -c.leaf_count)
    assert leaf.label == "x4"
    assert sorted(c.label for c in sub.children) == ["x1", "x2", "x3"]
    assert sub.interval == (2, 4) and sub.height == 2
    assert not d.binary
    d.validate()


def test_toy_pair_group_three_orders(toy):
    trees = set()
    for order in ([0, 1, 2, 3], [1, 2, 3, 0], [3, 0, 1, 2]):
        d = cluster(toy.permute(order), "arithmetic", group="pair")
        assert d.binary
        trees.add(canonical(d.root))
    assert len(trees) == 3


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
@pytest.mark.parametrize("group", ["pair", "variable"])
def test_two_objects(spec, group):
    d = cluster(ProximityMatrix(["a", "b"], [5.0]), spec, group)
    h = 25 if spec.method == "centroid" else 5  # centroid heights are squared
    assert d.root.interval == (h, h) and d.root.height == h
    assert len(d.root.children) == 2


def test_tie_components():
    assert tie_components([(0, 1), (1, 2)]) == [[0, 1, 2]]
    assert tie_components([(3, 7)]) == [[3, 7]]
    assert tie_components([(0, 1), (2, 3)]) == [[0, 1], [2, 3]]


def test_disjoint_ties_merge_in_same_iteration():
    sq = np.array([[0, 1, 6, 7],
                   [1, 0, 8, 9],
                   [6, 8, 0, 1],
                   [7, 9, 1, 0]], dtype=float)
    m = ProximityMatrix.from_square(sq, list("ABCD"))
    d = cluster(m, "single")
    kids = d.root.children
    assert len(kids) == 2 and all(len(k.children) == 2 for k in kids)
    assert [k.height for k in kids] == [1, 1]
    assert sorted(k.id for k in kids) == [4, 5]  # created in one step
    assert trees_equal(d, naive_cluster(m, MethodSpec("single")))


def test_no_tie_pair_equals_variable():
    rng = np.random.default_rng(7)
    m = random_matrix(rng, 32)
    for spec in ALL_SPECS:
        a = cluster(m, spec, "pair")
        b = cluster(m, spec, "variable")
        assert trees_equal(a, b), spec
        assert all(len(x.children) == 2 for x in b.internal_nodes())


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
@given(seed=seeds, n=st.integers(2, 14), group=st.sampled_from(["pair", "variable"]))
def test_matches_naive_oracle(spec, seed, n, group):
    rng = np.random.default_rng(seed)
    pool = [1, 2, 3, 4] if seed % 2 else None
    m = random_matrix(rng, n, pool=pool)
    assert trees_equal(cluster(m, spec, group), naive_cluster(m, spec, group),
                       rtol=1e-9, atol=1e-12)


def test_tie_rich_n20():
    rng = np.random.default_rng(3)
    m = random_matrix(rng, 20, pool=[1, 2, 3])
    for spec in ALL_SPECS:
        a = cluster(m, spec, "variable", digits=6)
        b = naive_cluster(m, spec, "variable", digits=6)
        assert trees_equal(a, b, rtol=1e-9), spec


def test_similarity_matches_complementary_distance():
    rng = np.random.default_rng(11)
    s = random_matrix(rng, 12, kind="similarity")
    dist = ProximityMatrix(s.labels, 1.0 - s.values)
    for name in ("single", "complete", "arithmetic"):
        ds, dd = cluster(s, name), cluster(dist, name)
        sims = sorted(1 - x.height for x in ds.internal_nodes())
        dists = sorted(x.height for x in dd.internal_nodes())
        assert np.allclose(sims, dists, atol=1e-12)


@given(seeds, st.integers(3, 16))
def test_variable_group_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    m = random_matrix(rng, n, pool=[1, 2, 3])
    ref = canonical(cluster(m, "arithmetic").root)
    for _ in range(3):
        mp = m.permute(rng.permutation(n))
        assert canonical(cluster(mp, "arithmetic").root) == ref


def test_digits_create_ties():
    m = ProximityMatrix(list("abc"), [1.01, 3.0, 1.04])
    assert cluster(m, "single").binary
    d = cluster(m, "single", digits=1)
    assert not d.binary and d.root.interval == (1.0, 3.0)


@pytest.mark.parametrize("method, scipy_method", [
    ("single", "single"), ("complete", "complete"),
    (MethodSpec("arithmetic"), "average"), (MethodSpec("arithmetic", True), "weighted"),
    ("ward", "ward")])
def test_cophenetic_matches_scipy(method, scipy_method):
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.normal(size=(15, 3))
        m = euclidean_matrix(x)
        z = hierarchy.linkage(pdist(x), scipy_method)
        ref = hierarchy.cophenet(z)
        got = cophenetic_matrix(cluster(m, method)).values
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-12)


def test_centroid_matches_scipy_squared():
    rng = np.random.default_rng(6)
    for weighted, name in ((False, "centroid"), (True, "median")):
        x = rng.normal(size=(15, 3))
        z = hierarchy.linkage(x, name)
        d = cluster(euclidean_matrix(x), MethodSpec("centroid", weighted))
        got = sorted(h.height for h in d.internal_nodes())
        assert np.allclose(got, sorted(z[:, 2] ** 2), rtol=1e-9)


@given(seeds)
def test_monotone_methods_heights_grow(seed):
    rng = np.random.default_rng(seed)
    m = random_matrix(rng, 10, pool=[1, 2, 3, 5, 8])
    for spec in ALL_SPECS:
        if spec.method in ("centroid", "ward"):
            continue
        if spec.method == "flexible" and spec.param > 0:
            continue
        strict = spec.method in ("single", "complete", "arithmetic", "ward")
        for node in cluster(m, spec).internal_nodes():
            for c in node.children:
                assert c.height <= node.height + 1e-12
                if strict:
                    assert c.height <= node.dmin + 1e-12


@given(seeds, st.integers(3, 14))
def test_ward_monotone_on_tied_grid_points(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 4, size=(n, 2))
    assume(len({tuple(r) for r in x}) == n)
    d = cluster(euclidean_matrix(x), "ward", digits=9)
    for node in d.internal_nodes():
        for c in node.children:
            assert c.height <= node.dmin + 1e-9


def test_fusion_interval_may_reach_above_parent():
    # chain a-b-c tied at 1 while d(a, c) = 8; x joins at 3 under single
    sq = np.array([[0, 1, 8, 3],
                   [1, 0, 1, 4],
                   [8, 1, 0, 5],
                   [3, 4, 5, 0]], dtype=float)
    d = cluster(ProximityMatrix.from_square(sq, list("abcx")), "single")
    child = next(c for c in d.root.children if not c.is_leaf)
    assert child.interval == (1, 8) and d.root.height == 3
