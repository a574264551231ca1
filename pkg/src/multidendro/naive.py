"""Reference agglomeration by full rescan, for differential testing.

Deliberately simple: proximities between active clusters are kept in a
dict keyed by cluster key pairs and the whole dict is scanned on every
iteration.  Cluster keys are the smallest input row of the cluster, as
in the optimized engine.
"""

from __future__ import annotations

from .engine import prepare
from .linkage import MergeContext, MethodSpec, merge_proximity
from .proximity import DISTANCE, ProximityMatrix, round_half_even
from .tree import Dendrogram, make_internal, make_leaf


def _components(edges):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen, comps = set(), []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, todo = [], [start]
        seen.add(start)
        while todo:
            x = todo.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        comps.append(sorted(comp))
    return comps


def naive_cluster(m: ProximityMatrix, spec: MethodSpec,
                  group: str = "variable",
                  digits: int | None = None) -> Dendrogram:
    m, sq = prepare(m, spec, group, digits)
    kind = m.kind
    n = m.n
    better = min if kind == DISTANCE else max

    def q(v):
        return v if digits is None else float(round_half_even(v, digits))

    prox = {(i, j): float(sq[i, j]) for i in range(n) for j in range(i + 1, n)}
    nodes = {k: make_leaf(k, m.labels[k], kind) for k in range(n)}
    size = {k: 1 for k in range(n)}
    next_id = n

    def d(a, b):
        return prox[(a, b) if a < b else (b, a)]

    while len(nodes) > 1:
        best = better(prox.values())
        edges = sorted(k for k, v in prox.items() if v == best)
        comps = [list(edges[0])] if group == "pair" else _components(edges)

        merged = {k for c in comps for k in c}
        rest = [k for k in nodes if k not in merged]
        groups = []
        for c in comps:
            within = [[d(a, b) if a != b else 0.0 for b in c] for a in c]
            pair_vals = [d(a, b) for i, a in enumerate(c) for b in c[i + 1:]]
            node = make_internal(next_id, [nodes[k] for k in c],
                                 min(pair_vals), max(pair_vals), kind)
            next_id += 1
            groups.append((c, within, node))

        new = {}
        for c, within, _ in groups:
            for k in rest:
                ctx = MergeContext([size[a] for a in c], [size[k]],
                                   [[d(a, k)] for a in c], within, None)
                new[(c[0], k)] = q(merge_proximity(spec, ctx, kind))
        for x in range(len(groups)):
            for y in range(x + 1, len(groups)):
                (c1, w1, _), (c2, w2, _) = groups[x], groups[y]
                ctx = MergeContext([size[a] for a in c1], [size[b] for b in c2],
                                   [[d(a, b) for b in c2] for a in c1], w1, w2)
                new[(c1[0], c2[0])] = q(merge_proximity(spec, ctx, kind))

        prox = {k: v for k, v in prox.items()
                if k[0] not in merged and k[1] not in merged}
        for (a, b), v in new.items():
            prox[(a, b) if a < b else (b, a)] = v
        for c, _, node in groups:
            for k in c:
                del nodes[k]
                del size[k]
            nodes[c[0]] = node
            size[c[0]] = node.leaf_count

    (root,) = nodes.values()
    return Dendrogram(root, spec, kind, digits, m.labels, group)
