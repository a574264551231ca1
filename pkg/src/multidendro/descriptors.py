"""Cophenetic matrix and descriptive measures of a dendrogram."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .proximity import DISTANCE, ProximityMatrix, round_half_even
from .linkage import WEIGHTABLE
from .tree import Dendrogram

MEASURES = ("cor", "sdr", "ac", "cc", "tb")


@dataclass(frozen=True)
class DescriptorSet:
    cor: float
    sdr: float
    ac: float
    cc: float
    tb: float

    def __getitem__(self, name):
        if name not in MEASURES:
            raise KeyError(name)
        return getattr(self, name)

    def as_tuple(self):
        return astuple(self)


def _cophenetic_square(d: Dendrogram) -> np.ndarray:
    n = len(d.labels)
    pos = {lab: k for k, lab in enumerate(d.labels)}
    sq = np.full((n, n), d.base)
    members = {}
    for leaf in d.root.leaves():
        members[id(leaf)] = [pos[leaf.label]]
    for node in d.root.internal_nodes():
        groups = [members.pop(id(c)) for c in node.children]
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                sq[np.ix_(groups[a], groups[b])] = node.height
                sq[np.ix_(groups[b], groups[a])] = node.height
        members[id(node)] = [k for g in groups for k in g]
    return sq


def cophenetic_matrix(d: Dendrogram) -> ProximityMatrix:
    """Merge height of the lowest common ancestor of every pair.

    Tied nodes contribute the height at which their merge was
    triggered (D_min for distances).
    """
    sq = _cophenetic_square(d)
    n = sq.shape[0]
    vals = sq[np.triu_indices(n, 1)]
    if d.kind != DISTANCE:
        vals = np.clip(vals, 0.0, 1.0)
    return ProximityMatrix(d.labels, vals, d.kind)


def _input_values(d: Dendrogram, m: ProximityMatrix) -> np.ndarray:
    if tuple(m.labels) != tuple(d.labels):
        order = [m.labels.index(lab) for lab in d.labels]
        m = m.permute(order)
    vals = np.asarray(m.values, dtype=float)
    if d.digits is not None:
        vals = round_half_even(vals, d.digits)
    if d.spec.method == "centroid":
        vals = vals * vals
    return vals


def _pearson(x, y) -> float:
    # fsum over a value-sorted pairing: exact and independent of pair order
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    xc = x - math.fsum(x) / len(x)
    yc = y - math.fsum(y) / len(y)
    den = math.sqrt(math.fsum(xc * xc) * math.fsum(yc * yc))
    if den == 0.0:
        return math.nan
    return math.fsum(xc * yc) / den


def _depth(d: Dendrogram, h: float) -> float:
    """Heights measured from the leaves (1 - s for similarities)."""
    return h if d.kind == DISTANCE else 1.0 - h


def agglomerative_coefficient(d: Dendrogram) -> float:
    root_h = _depth(d, d.root.height)
    if d.n < 2 or root_h == 0:
        return 0.0
    terms = []
    for node in d.root.internal_nodes():
        h = _depth(d, node.height)
        terms.extend(1.0 - h / root_h for c in node.children if c.is_leaf)
    return math.fsum(terms) / d.n


def chaining_coefficient(d: Dendrogram) -> float:
    """Sum over fusions of (largest - smallest branch leaf count),
    normalized by its value (n-1)(n-2)/2 for a fully chained tree."""
    n = d.n
    if n < 3:
        return 0.0
    total = 0
    for node in d.root.internal_nodes():
        counts = [c.leaf_count for c in node.children]
        total += max(counts) - min(counts)
    return total / ((n - 1) * (n - 2) / 2)


def tree_balance(d: Dendrogram) -> float:
    ent = []
    for node in d.root.internal_nodes():
        counts = np.sort([c.leaf_count for c in node.children]).astype(float)
        share = counts / counts.sum()
        ent.append(-math.fsum(share * np.log(share)) / math.log(len(counts)))
    return math.fsum(ent) / len(ent)


def descriptor_set(d: Dendrogram, m: ProximityMatrix) -> DescriptorSet:
    """cor, sdr, ac, cc and tb of `d`, which was built from `m`."""
    coph = _cophenetic_square(d)[np.triu_indices(d.n, 1)]
    inp = _input_values(d, m)
    cor = _pearson(coph, inp)
    span = inp.max() - inp.min()
    sdr = (coph.max() - coph.min()) / span if span > 0 else math.nan
    return DescriptorSet(cor=cor, sdr=float(sdr),
                         ac=agglomerative_coefficient(d),
                         cc=chaining_coefficient(d), tb=tree_balance(d))


def summary(d: Dendrogram, desc: DescriptorSet | None = None,
            m: ProximityMatrix | None = None, source: str = "m") -> str:
    """Text block: call echo, object count, binarity and descriptors."""
    if desc is None:
        desc = descriptor_set(d, m)
    spec = d.spec
    args = [f"{source}",
            f'kind="{d.kind}"',
            f"digits={d.digits}",
            f'method="{spec.method}"']
    if spec.param is not None:
        args.append(f"param={_fmt_param(spec.param)}")
    if spec.method in WEIGHTABLE:
        args.append(f"weighted={spec.weighted}")
    args.append(f'group="{d.group}"')
    pad = " " * len("cluster(")
    call = "cluster(" + (",\n" + pad).join(args) + ")"
    names = " ".join(f"{k:>9}" for k in MEASURES)
    vals = " ".join(f"{_fmt7(desc[k]):>9}" for k in MEASURES)
    return (f"Call:\n{call}\n\n"
            f"Number of objects: {d.n}\n\n"
            f"Binary dendrogram: {'TRUE' if d.binary else 'FALSE'}\n\n"
            f"Descriptive measures:\n{names}\n{vals}\n")


def _fmt7(x: float) -> str:
    if math.isnan(x):
        return "NA"
    return f"{x:.7f}"


def _fmt_param(p: float) -> str:
    if math.isinf(p):
        return "inf" if p > 0 else "-inf"
    return f"{p:g}"
