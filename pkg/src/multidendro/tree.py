"""Dendrogram data types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .linkage import MethodSpec
from .proximity import DISTANCE, SIMILARITY, normalize_kind


class TreeError(ValueError):
    """Raised when a tree violates a structural invariant."""


@dataclass(eq=False)
class ClusterNode:
    """A node of a (multi)dendrogram.

    Leaves carry `label` and `index` (their row in the input matrix).
    Internal nodes carry the fusion interval (lo, hi): the smallest and
    largest proximity among the subclusters merged together, and
    `height`, the proximity that triggered the merge (lo for distances,
    hi for similarities).
    """

    id: int
    children: list["ClusterNode"] = field(default_factory=list)
    leaf_count: int = 1
    interval: tuple[float, float] | None = None
    label: str | None = None
    height: float = 0.0
    index: int | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def dmin(self) -> float:
        return self.interval[0] if self.interval else self.height

    @property
    def dmax(self) -> float:
        return self.interval[1] if self.interval else self.height

    @property
    def tied(self) -> bool:
        return self.interval is not None and self.interval[0] != self.interval[1]

    def leaves(self) -> Iterator["ClusterNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def internal_nodes(self) -> Iterator["ClusterNode"]:
        """Post-order traversal of the internal nodes."""
        out = []
        stack = [(self, False)]
        while stack:
            node, seen = stack.pop()
            if node.is_leaf:
                continue
            if seen:
                out.append(node)
            else:
                stack.append((node, True))
                stack.extend((c, False) for c in reversed(node.children))
        return iter(out)

    def min_label(self) -> str:
        return min(leaf.label for leaf in self.leaves())

    def ordered_children(self) -> list["ClusterNode"]:
        """Children sorted by smallest contained label."""
        return sorted(self.children, key=ClusterNode.min_label)


@dataclass(eq=False)
class Dendrogram:
    root: ClusterNode
    spec: MethodSpec
    kind: str = DISTANCE
    digits: int | None = None
    labels: tuple = ()
    group: str = "variable"

    def __post_init__(self):
        self.kind = normalize_kind(self.kind)
        if not self.labels:
            leaves = sorted(self.root.leaves(), key=lambda x: x.index)
            self.labels = tuple(leaf.label for leaf in leaves)
        self.labels = tuple(self.labels)

    @property
    def n(self) -> int:
        return self.root.leaf_count

    @property
    def base(self) -> float:
        """Height of the leaves: 0 for distances, 1 for similarities."""
        return 0.0 if self.kind == DISTANCE else 1.0

    @property
    def binary(self) -> bool:
        return all(len(x.children) == 2 for x in self.root.internal_nodes())

    def internal_nodes(self) -> list[ClusterNode]:
        return list(self.root.internal_nodes())

    def validate(self) -> None:
        """Check structural invariants; raise TreeError on violation."""
        seen = set()
        for leaf in self.root.leaves():
            if leaf.leaf_count != 1:
                raise TreeError("leaf with leaf_count != 1")
            if leaf.label in seen:
                raise TreeError(f"duplicate leaf label {leaf.label!r}")
            seen.add(leaf.label)
        if seen != set(self.labels):
            raise TreeError("leaves do not match the label set")
        for node in self.root.internal_nodes():
            if len(node.children) < 2:
                raise TreeError("internal node with fewer than two children")
            if node.leaf_count != sum(c.leaf_count for c in node.children):
                raise TreeError("leaf_count mismatch")
            lo, hi = node.interval
            if not lo <= hi:
                raise TreeError(f"fusion interval with D_min > D_max: {lo} > {hi}")
            if node.height not in (lo, hi):
                raise TreeError("height is not an endpoint of the fusion interval")
        if self.root.leaf_count != len(self.labels):
            raise TreeError("root leaf_count differs from object count")


def _postorder_forms(node: ClusterNode, leaf_form, internal_form):
    """Bottom-up fold returning (form, min_label) for `node`."""
    memo = {}
    for x in node.leaves():
        memo[id(x)] = (leaf_form(x), x.label)
    for x in node.internal_nodes():
        kids = sorted((memo.pop(id(c)) for c in x.children),
                      key=lambda fm: fm[1])
        memo[id(x)] = (internal_form(x, tuple(f for f, _ in kids)), kids[0][1])
    return memo[id(node)]


def canonical(node: ClusterNode, digits: int | None = None):
    """Order-free nested representation of a tree.

    Children are sorted by their smallest leaf label; internal nodes
    carry (height, lo, hi), rounded at `digits` when given.
    """
    def r(x):
        return round(x, digits) if digits is not None else x

    def internal(x, kids):
        lo, hi = x.interval
        return ((r(x.height), r(lo), r(hi)), kids)

    return _postorder_forms(node, lambda x: x.label, internal)[0]


def shape(node: ClusterNode):
    """Canonical topology without heights."""
    return _postorder_forms(node, lambda x: x.label, lambda x, kids: kids)[0]


def _close(a, b, rtol, atol):
    if a == b:
        return True
    return math.isclose(a, b, rel_tol=rtol, abs_tol=atol)


def trees_equal(a, b, rtol: float = 0.0, atol: float = 0.0) -> bool:
    """Same topology and heights (within tolerance) for two trees."""
    ra = a.root if isinstance(a, Dendrogram) else a
    rb = b.root if isinstance(b, Dendrogram) else b
    stack = [(canonical(ra), canonical(rb))]
    while stack:
        x, y = stack.pop()
        if isinstance(x, str) or isinstance(y, str):
            if x != y:
                return False
            continue
        (hx, kx), (hy, ky) = x, y
        if len(kx) != len(ky):
            return False
        if not all(_close(u, v, rtol, atol) for u, v in zip(hx, hy)):
            return False
        stack.extend(zip(kx, ky))
    return True


def make_leaf(index: int, label: str, kind: str = DISTANCE) -> ClusterNode:
    base = 0.0 if normalize_kind(kind) == DISTANCE else 1.0
    return ClusterNode(id=index, label=str(label), index=index, height=base)


def make_internal(id: int, children, lo: float, hi: float,
                  kind: str = DISTANCE) -> ClusterNode:
    height = lo if normalize_kind(kind) == DISTANCE else hi
    return ClusterNode(id=id, children=list(children),
                       leaf_count=sum(c.leaf_count for c in children),
                       interval=(float(lo), float(hi)), height=float(height))


__all__ = ["ClusterNode", "Dendrogram", "TreeError", "canonical", "shape",
           "trees_equal", "make_leaf", "make_internal", "SIMILARITY"]
