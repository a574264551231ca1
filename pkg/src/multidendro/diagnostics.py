"""Tools for exposing tie-induced nonuniqueness."""

from __future__ import annotations

import math

import numpy as np

from .descriptors import MEASURES, descriptor_set
from .engine import cluster, prepare
from .linkage import MergeContext, MethodSpec, merge_proximity
from .proximity import DISTANCE, ProximityMatrix, round_half_even


def _check_measure(measure):
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")


def descriptor_sweep(m: ProximityMatrix, spec: MethodSpec, measure: str,
                     params, group: str = "variable",
                     digits: int | None = None) -> list[tuple[float, float]]:
    """One clustering per parameter value; returns (param, measure) pairs."""
    _check_measure(measure)
    out = []
    for p in params:
        d = cluster(m, spec.with_param(float(p)), group, digits)
        out.append((float(p), descriptor_set(d, m)[measure]))
    return out


def permutation_study(m: ProximityMatrix, spec: MethodSpec,
                      group: str = "pair", digits: int | None = None,
                      trials: int = 100, seed: int | None = 0,
                      measure: str = "cor",
                      include_identity: bool = False) -> list[float]:
    """Descriptor values over random reorderings of the input, sorted.

    With `include_identity` the first trial uses the original order.
    """
    _check_measure(measure)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    values = []
    for t in range(trials):
        if include_identity and t == 0:
            order = np.arange(m.n)
        else:
            order = rng.permutation(m.n)
        mp = m.permute(order)
        d = cluster(mp, spec, group, digits)
        values.append(descriptor_set(d, mp)[measure])
    return sorted(values)


def enumerate_pair_dendrograms(m: ProximityMatrix, spec: MethodSpec,
                               digits: int | None = None,
                               limit: int = 10_000) -> tuple[int, bool]:
    """Count structurally different pair-group dendrograms.

    Explores every choice of extremal pair at every iteration.  States
    reached through different merge orders are visited once.  Trees are
    compared by topology and merge heights (rounded at `digits`).
    Returns (count, exhausted); when more than `limit` trees exist the
    search stops and returns (limit, False).
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    m, sq = prepare(m, spec, "pair", digits)
    kind = m.kind
    n = m.n
    better = min if kind == DISTANCE else max

    def q(v):
        return v if digits is None else float(round_half_even(v, digits))

    def r(h):
        return round(h, digits) if digits is not None else h

    # cluster: key -> (form, min_label, size); form carries rounded heights
    start_clusters = {k: (m.labels[k], m.labels[k], 1) for k in range(n)}
    start_prox = {(i, j): float(sq[i, j])
                  for i in range(n) for j in range(i + 1, n)}
    # within-cluster proximities are not needed for a two-way merge beyond
    # the pair itself, so the state is just (clusters, proximities)
    stack = [(start_clusters, start_prox)]
    seen = set()
    finals = set()
    while stack:
        clusters, prox = stack.pop()
        if len(clusters) == 1:
            (form, _, _), = clusters.values()
            finals.add(form)
            if len(finals) > limit:
                return limit, False
            continue
        best = better(prox.values())
        for a, b in sorted(k for k, v in prox.items() if v == best):
            fa, la, na = clusters[a]
            fb, lb, nb = clusters[b]
            kids = tuple(sorted(((fa, la), (fb, lb)), key=lambda t: t[1]))
            form = (r(best), tuple(f for f, _ in kids))
            new_key = min(a, b)
            nxt = {k: v for k, v in clusters.items() if k not in (a, b)}
            nxt[new_key] = (form, min(la, lb), na + nb)
            sig = frozenset(v[0] for v in nxt.values())
            if sig in seen:
                continue
            seen.add(sig)
            new_prox = {}
            for (x, y), v in prox.items():
                if x in (a, b) or y in (a, b):
                    continue
                new_prox[(x, y)] = v
            pair_d = prox[(a, b)]
            for k in nxt:
                if k == new_key:
                    continue
                da = prox[(a, k) if a < k else (k, a)]
                db = prox[(b, k) if b < k else (k, b)]
                ctx = MergeContext([na, nb], [clusters[k][2]], [[da], [db]],
                                   [[0.0, pair_d], [pair_d, 0.0]], None)
                v = q(merge_proximity(spec, ctx, kind))
                new_prox[(new_key, k) if new_key < k else (k, new_key)] = v
            stack.append((nxt, new_prox))
    return len(finals), True


def argbest(points, maximize: bool = True):
    """Parameter with the best finite value in a sweep."""
    finite = [(p, v) for p, v in points if not math.isnan(v)]
    if not finite:
        raise ValueError("no finite values")
    pick = max if maximize else min
    return pick(finite, key=lambda t: t[1])[0]
