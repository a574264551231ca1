"""Agglomeration engine: pair-group and variable-group clustering.

Proximities live in a dense slot-indexed matrix in *oriented* form
(distances as they are, similarities negated), so the merge candidate is
always the minimum.  A merged cluster takes over the smallest slot of
its members; the slot index is therefore the smallest input row of the
cluster, which is also the key used for pair-group tie-breaking.

Each active slot caches the minimum of its row.  After a merge only the
rows whose cached neighbour was absorbed are rescanned; every other row
just compares against the new column.
"""

from __future__ import annotations

import numpy as np

from .linkage import MethodSpec, merge_proximity, merge_rows, MergeContext
from .proximity import (DISTANCE, ProximityMatrix, quantize,
                        round_half_even)
from .tree import Dendrogram, make_internal, make_leaf

GROUPS = ("pair", "variable")


def prepare(m: ProximityMatrix, spec: MethodSpec, group: str,
            digits: int | None):
    """Validate arguments and return the working square matrix."""
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    spec.check_kind(m.kind)
    if digits is not None:
        m = quantize(m, digits)
    sq = np.array(m.square(), dtype=float)
    if spec.method == "centroid":
        sq = sq * sq
    return m, sq


def tie_components(edges, nodes=None) -> list[list[int]]:
    """Connected components of the graph of extremal pairs.

    `edges` is an iterable of (a, b) pairs at the extremal proximity.
    Nodes of `nodes` not touched by any edge come back as singleton
    components.  Components are sorted lists, ordered by first element.
    """
    parent = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in edges:
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra
    for x in nodes or ():
        parent.setdefault(x, x)
    comps = {}
    for x in parent:
        comps.setdefault(find(x), []).append(x)
    return sorted((sorted(c) for c in comps.values()), key=lambda c: c[0])


class _Engine:
    def __init__(self, m: ProximityMatrix, spec: MethodSpec, group: str,
                 digits: int | None):
        self.m, sq = prepare(m, spec, group, digits)
        self.spec = spec
        self.group = group
        self.digits = digits
        self.kind = m.kind
        self.sign = 1.0 if self.kind == DISTANCE else -1.0
        n = self.n = m.n
        self.O = self.sign * sq
        np.fill_diagonal(self.O, np.inf)
        self.active = np.ones(n, dtype=bool)
        self.size = np.ones(n)
        self.nodes = [make_leaf(k, m.labels[k], self.kind) for k in range(n)]
        self.next_id = n
        self.nn_val = self.O.min(axis=1)
        self.nn_idx = self.O.argmin(axis=1)

    def _q(self, values):
        if self.digits is None:
            return values
        return round_half_even(values, self.digits)

    def extremal_edges(self):
        best = self.nn_val.min()
        rows = np.flatnonzero(self.nn_val == best)
        edges = set()
        for i in rows:
            for j in np.flatnonzero(self.O[i] == best):
                edges.add((min(i, j), max(i, j)))
        return best, sorted(edges)

    def step(self):
        best, edges = self.extremal_edges()
        if self.group == "pair":
            comps = [list(edges[0])]
        else:
            comps = tie_components(edges)
        self.merge(comps, best)

    def merge(self, comps, best):
        O, sign = self.O, self.sign
        merged = np.concatenate([np.asarray(c) for c in comps])
        keep = self.active.copy()
        keep[merged] = False
        others = np.flatnonzero(keep)

        new_rows = []
        for comp in comps:
            idx = np.asarray(comp)
            sub = sign * O[np.ix_(idx, idx)]
            np.fill_diagonal(sub, 0.0)
            pairs = sub[np.triu_indices(len(idx), 1)]
            lo, hi = float(pairs.min()), float(pairs.max())
            node = make_internal(self.next_id, [self.nodes[k] for k in comp],
                                 lo, hi, self.kind)
            self.next_id += 1
            vals = merge_rows(self.spec, self.kind, self.size[idx], sub,
                              sign * O[np.ix_(idx, others)], self.size[others])
            new_rows.append((idx, sub, node, self._q(vals)))

        # proximities between groups formed in this same iteration
        cross_new = {}
        for a in range(len(new_rows)):
            for b in range(a + 1, len(new_rows)):
                ia, sa, _, _ = new_rows[a]
                ib, sb, _, _ = new_rows[b]
                ctx = MergeContext(self.size[ia], self.size[ib],
                                   sign * O[np.ix_(ia, ib)], sa, sb)
                cross_new[a, b] = self._q(
                    merge_proximity(self.spec, ctx, self.kind))

        O[merged, :] = np.inf
        O[:, merged] = np.inf
        self.active[merged] = False
        self.nn_val[merged] = np.inf
        reps = []
        for idx, _, node, vals in new_rows:
            s = idx[0]
            reps.append(s)
            self.active[s] = True
            self.size[s] = node.leaf_count
            self.nodes[s] = node
            O[s, others] = sign * vals
            O[others, s] = sign * vals
        for (a, b), v in cross_new.items():
            sa, sb = reps[a], reps[b]
            O[sa, sb] = O[sb, sa] = sign * v

        # refresh nearest-neighbour caches
        stale = others[np.isin(self.nn_idx[others], merged)]
        fresh = others[~np.isin(self.nn_idx[others], merged)]
        if stale.size:
            sub = O[stale]
            self.nn_idx[stale] = sub.argmin(axis=1)
            self.nn_val[stale] = sub[np.arange(stale.size), self.nn_idx[stale]]
        for s in reps:
            col = O[fresh, s]
            better = col < self.nn_val[fresh]
            upd = fresh[better]
            self.nn_val[upd] = col[better]
            self.nn_idx[upd] = s
            row = O[s]
            self.nn_idx[s] = row.argmin()
            self.nn_val[s] = row[self.nn_idx[s]]

    def run(self) -> Dendrogram:
        while self.active.sum() > 1:
            self.step()
        root = self.nodes[int(np.flatnonzero(self.active)[0])]
        return Dendrogram(root, self.spec, self.kind, self.digits,
                          self.m.labels, self.group)


def cluster(m: ProximityMatrix, spec: MethodSpec | str = "arithmetic",
            group: str = "variable", digits: int | None = None,
            weighted: bool = False, param: float | None = None) -> Dendrogram:
    """Hierarchically cluster a proximity matrix.

    Parameters
    ----------
    m : ProximityMatrix
        Distances or similarities between the objects.
    spec : MethodSpec or str
        Linkage method; a bare name is combined with `weighted` and
        `param`.
    group : {"variable", "pair"}
        "variable" merges every connected group of clusters tied at the
        extremal proximity in one step (a multidendrogram); "pair"
        merges a single pair, breaking ties by the smallest input rows.
    digits : int, optional
        Resolution used to detect ties; the input and every computed
        proximity are rounded to this many decimals.

    Returns
    -------
    Dendrogram
    """
    if isinstance(spec, str):
        spec = MethodSpec(spec, weighted, param)
    return _Engine(m, spec, group, digits).run()


def linkage(m, method="arithmetic", **kwargs) -> Dendrogram:
    return cluster(m, method, **kwargs)
