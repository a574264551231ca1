import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multidendro import MethodSpec, ProximityMatrix, cluster, descriptor_set
from multidendro.diagnostics import (argbest, descriptor_sweep,
                                     enumerate_pair_dendrograms, permutation_study)

from conftest import random_matrix

LEAF_LEVEL = {"single": min, "complete": max,
              "arithmetic": lambda v: sum(v) / len(v)}


def brute_force_count(sq, method):
    """Every tie choice explored; proximities recomputed from object level.

    A binary dendrogram is identified by its set of (members, height)
    clusters.
    """
    agg = LEAF_LEVEL[method]
    n = sq.shape[0]
    finals = set()

    def walk(clusters, made):
        if len(clusters) == 1:
            finals.add(frozenset(made))
            return
        prox = {}
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                vals = [sq[i, j] for i in clusters[a] for j in clusters[b]]
                prox[(a, b)] = agg(vals)
        best = min(prox.values())
        for (a, b), v in prox.items():
            if v == best:
                merged = clusters[a] | clusters[b]
                rest = [c for k, c in enumerate(clusters) if k not in (a, b)]
                walk(rest + [merged], made | {(merged, v)})

    walk([frozenset([k]) for k in range(n)], frozenset())
    return len(finals)


def test_toy_count(toy):
    assert enumerate_pair_dendrograms(toy, MethodSpec("arithmetic")) == (3, True)


def test_tie_free_count():
    m = random_matrix(np.random.default_rng(0), 9)
    assert enumerate_pair_dendrograms(m, MethodSpec("complete")) == (1, True)


@pytest.mark.parametrize("method", ["single", "complete", "arithmetic"])
@pytest.mark.parametrize("seed", range(4))
def test_count_matches_brute_force(method, seed):
    m = random_matrix(np.random.default_rng(seed), 6, pool=[1, 2])
    count, done = enumerate_pair_dendrograms(m, MethodSpec(method))
    assert done and count == brute_force_count(m.square(), method)


def test_enumeration_limit():
    m = ProximityMatrix([str(k) for k in range(6)], [1.0] * 15)
    count, done = enumerate_pair_dendrograms(m, MethodSpec("single"), limit=5)
    assert (count, done) == (5, False)


def test_variable_group_permutations_identical():
    m = random_matrix(np.random.default_rng(1), 14, pool=[1, 2, 3])
    vals = permutation_study(m, MethodSpec("arithmetic"), "variable", trials=100)
    assert len(set(vals)) == 1


def test_pair_group_permutations_differ():
    rng = np.random.default_rng(4)
    m = random_matrix(rng, 24, digits=1)
    vals = permutation_study(m, MethodSpec("arithmetic"), "pair", digits=1,
                             trials=100)
    assert len(set(vals)) >= 2
    assert vals == sorted(vals)


def test_single_identity_trial(cities):
    spec = MethodSpec("arithmetic")
    got = permutation_study(cities, spec, "pair", trials=1, include_identity=True)
    assert got == [descriptor_set(cluster(cities, spec, "pair"), cities).cor]


def test_single_param_sweep(cities):
    pts = descriptor_sweep(cities, MethodSpec("versatile", False, 0.0), "sdr", [2.0])
    assert len(pts) == 1 and pts[0][0] == 2.0


def test_argbest_skips_nan():
    pts = [(0, 0.2), (1, math.nan), (2, 0.5), (3, 0.1)]
    assert argbest(pts) == 2 and argbest(pts, maximize=False) == 3


@given(st.sampled_from(["cor", "sdr", "ac", "cc", "tb"]))
def test_sweep_values_match_direct_runs(measure):
    m = random_matrix(np.random.default_rng(9), 8)
    spec = MethodSpec("flexible", False, 0.0)
    for beta, v in descriptor_sweep(m, spec, measure, [-0.5, 0.0, 0.5]):
        d = cluster(m, spec.with_param(beta))
        assert v == descriptor_set(d, m)[measure]


def test_bad_measure():
    with pytest.raises(ValueError):
        descriptor_sweep(ProximityMatrix(["a", "b"], [1.0]),
                         MethodSpec("versatile", False, 1.0), "nope", [1.0])
