"""Dendrogram import/export: JSON, Newick and flat merge tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import jsonschema

from .linkage import MethodSpec
from .proximity import DISTANCE, normalize_kind
from .tree import (ClusterNode, Dendrogram, TreeError, make_internal,
                   make_leaf)

SCHEMA_VERSION = 1


class SerializationError(ValueError):
    pass


# -- merge tables -----------------------------------------------------------

@dataclass
class MergeTable:
    """Fusion-ordered binary merges.

    Each row is (left, right, height): negative ids -k name the k-th
    input object, positive ids k name the cluster built by row k.
    """

    rows: list[tuple[int, int, float]] = field(default_factory=list)
    labels: tuple = ()

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["left", "right", "height"])
        for a, b, h in self.rows:
            w.writerow([a, b, _num(h)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, labels=()) -> "MergeTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["left", "right", "height"]:
            raise SerializationError("merge table needs a left,right,height header")
        rows = []
        for k, rec in enumerate(reader, 1):
            if not rec:
                continue
            try:
                rows.append((int(rec[0]), int(rec[1]), float(rec[2])))
            except (ValueError, IndexError):
                raise SerializationError(f"bad merge table row {k}") from None
        return cls(rows, tuple(labels))


def _min_index(node: ClusterNode) -> int:
    return min(leaf.index for leaf in node.leaves())


def to_merge_table(d: Dendrogram) -> MergeTable:
    """Expand multifurcations into consecutive binary rows.

    A node with k children becomes k-1 rows at its height, folding its
    children from the left in order of their smallest input row.
    """
    rows = []
    ref = {}
    for leaf in d.root.leaves():
        ref[id(leaf)] = -(leaf.index + 1)
    for node in sorted(d.root.internal_nodes(), key=lambda x: x.id):
        kids = sorted(node.children, key=_min_index)
        acc = ref[id(kids[0])]
        for c in kids[1:]:
            rows.append((acc, ref[id(c)], node.height))
            acc = len(rows)
        ref[id(node)] = acc
    return MergeTable(rows, tuple(d.labels))


def from_merge_table(table: MergeTable, spec: MethodSpec | None = None,
                     kind: str = DISTANCE, labels=None) -> Dendrogram:
    """Binary dendrogram from a merge table; every node has a zero-width
    fusion interval."""
    labels = tuple(labels or table.labels)
    n = len(table.rows) + 1
    if not labels:
        labels = tuple(str(k + 1) for k in range(n))
    if len(labels) != n:
        raise SerializationError(f"{len(table.rows)} rows need {n} labels")
    leaves = {-(k + 1): make_leaf(k, labels[k], kind) for k in range(n)}
    built = {}
    used = set()
    for r, (a, b, h) in enumerate(table.rows, 1):
        kids = []
        for x in (a, b):
            if x in used:
                raise SerializationError(f"row {r}: id {x} used twice")
            used.add(x)
            src = leaves if x < 0 else built
            if x not in src:
                raise SerializationError(f"row {r}: unknown id {x}")
            kids.append(src[x])
        built[r] = make_internal(n + r - 1, kids, h, h, kind)
    if len(used) != 2 * (n - 1) or n - 1 not in built:
        raise SerializationError("merge table does not form a single tree")
    return Dendrogram(built[n - 1], spec or MethodSpec("arithmetic"),
                      kind, None, labels)


# -- Newick -----------------------------------------------------------------

_SPECIAL = set(" \t\n()[]':;,")


def _num(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _quote(label: str) -> str:
    if label and not any(ch in _SPECIAL for ch in label):
        return label
    return "'" + label.replace("'", "''") + "'"


def _branch(d: Dendrogram, parent: float, child: float) -> float:
    return parent - child if d.kind == DISTANCE else child - parent


def _rebuild(d: Dendrogram, child: float, length: float) -> float:
    return child + length if d.kind == DISTANCE else child - length


def to_newick(d: Dendrogram, with_intervals: bool = True) -> str:
    """Newick text with branch lengths from merge-height differences.

    With `with_intervals`, tied nodes get a "[Dmin=..,Dmax=..]" comment,
    and a "[H=..]" comment is added wherever the height could not be
    recovered exactly from the branch lengths.
    """
    text = {}
    rebuilt = {}
    for leaf in d.root.leaves():
        text[id(leaf)] = _quote(leaf.label)
        rebuilt[id(leaf)] = leaf.height
    for node in d.root.internal_nodes():
        kids = node.ordered_children()
        parts = []
        for c in kids:
            parts.append(f"{text.pop(id(c))}:{_num(_branch(d, node.height, c.height))}")
        s = "(" + ",".join(parts) + ")"
        first = kids[0]
        guess = _rebuild(d, rebuilt.pop(id(first)),
                         _branch(d, node.height, first.height))
        for c in kids[1:]:
            rebuilt.pop(id(c))
        if with_intervals:
            notes = []
            if node.tied:
                notes.append(f"Dmin={_num(node.dmin)},Dmax={_num(node.dmax)}")
            if guess != node.height and not node.tied:
                notes.append(f"H={_num(node.height)}")
            if notes:
                s += "[" + ",".join(notes) + "]"
            rebuilt[id(node)] = node.height
        else:
            rebuilt[id(node)] = guess
        text[id(node)] = s
    return text[id(d.root)] + ";"


def _tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),:;":
            yield ch, None
            i += 1
        elif ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise SerializationError("unterminated comment")
            yield "[", text[i + 1:j]
            i = j + 1
        elif ch == "'":
            buf = []
            i += 1
            while True:
                if i >= n:
                    raise SerializationError("unterminated quoted label")
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                buf.append(text[i])
                i += 1
            yield "label", "".join(buf)
        else:
            j = i
            while j < n and text[j] not in _SPECIAL:
                j += 1
            yield "label", text[i:j]
            i = j


def _parse_comment(body: str) -> dict:
    out = {}
    for item in body.split(","):
        if "=" in item:
            k, v = item.split("=", 1)
            try:
                out[k.strip()] = float(v)
            except ValueError:
                raise SerializationError(f"bad comment value {item!r}") from None
    return out


def from_newick(text: str, kind: str = DISTANCE, spec: MethodSpec | None = None,
                labels=None) -> Dendrogram:
    """Parse Newick produced by `to_newick` (or plain Newick with branch
    lengths).  Leaves are indexed by `labels` if given, else in order of
    appearance."""
    kind = normalize_kind(kind)
    stack = [[]]  # children collected for each open parenthesis
    last = None   # node being completed
    done = False
    for tok, val in _tokens(text.strip()):
        if done:
            raise SerializationError("text after ';'")
        if tok == "(":
            if last is not None:
                raise SerializationError("unexpected '('")
            stack.append([])
        elif tok == "label":
            if last is not None and last.get("colon") and "length" not in last:
                try:
                    last["length"] = float(val)
                except ValueError:
                    raise SerializationError(
                        f"bad branch length {val!r}") from None
            elif last is None:
                last = {"label": val}
            elif "children" in last and "name" not in last:
                last["name"] = val
            else:
                raise SerializationError(f"unexpected label {val!r}")
        elif tok == ":":
            if last is None or last.get("colon"):
                raise SerializationError("misplaced ':'")
            last["colon"] = True
        elif tok == "[":
            if last is None:
                raise SerializationError("comment without a node")
            last.setdefault("notes", {}).update(_parse_comment(val))
        else:  # , ) ;
            if last is None:
                raise SerializationError(f"empty node before {tok!r}")
            stack[-1].append(last)
            last = None
            if tok == ")":
                if len(stack) < 2:
                    raise SerializationError("unbalanced parentheses")
                last = {"children": stack.pop()}
            elif tok == ";":
                if len(stack) != 1 or len(stack[0]) != 1:
                    raise SerializationError("unbalanced parentheses")
                done = True
    if not done:
        raise SerializationError("missing ';'")
    return _build_newick_tree(stack[0][0], kind, spec, labels)


def _build_newick_tree(top, kind, spec, labels):
    # walk post-order iteratively
    order, stack = [], [top]
    while stack:
        x = stack.pop()
        order.append(x)
        if x.get("children"):
            stack.extend(x["children"])
    order.reverse()
    appearance = []
    stack = [top]
    while stack:
        x = stack.pop()
        if x.get("children"):
            stack.extend(reversed(x["children"]))
        else:
            appearance.append(x["label"])
    names = tuple(labels) if labels else tuple(appearance)
    if sorted(names) != sorted(appearance) or len(set(names)) != len(names):
        raise SerializationError("leaf labels do not match")
    pos = {lab: k for k, lab in enumerate(names)}
    built = {}
    next_id = len(names)
    for x in order:
        if not x.get("children"):
            built[id(x)] = make_leaf(pos[x["label"]], x["label"], kind)
            continue
        kids = [built[id(c)] for c in x["children"]]
        if len(kids) < 2:
            raise SerializationError("internal node with a single child")
        notes = x.get("notes", {})
        first = x["children"][0]
        if "length" not in first:
            raise SerializationError("missing branch length")
        guess = (kids[0].height + first["length"] if kind == DISTANCE
                 else kids[0].height - first["length"])
        h = notes.get("H", guess)
        lo, hi = notes.get("Dmin", h), notes.get("Dmax", h)
        if "Dmin" in notes:
            h = lo if kind == DISTANCE else hi
        node = make_internal(next_id, kids, lo, hi, kind)
        next_id += 1
        built[id(x)] = node
    d = Dendrogram(built[id(top)], spec or MethodSpec("arithmetic"), kind,
                   None, names)
    try:
        d.validate()
    except TreeError as e:
        raise SerializationError(str(e)) from None
    return d


# -- JSON -------------------------------------------------------------------

@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files(__package__).joinpath(
        "dendrogram.schema.json").read_text("utf-8")
    return json.loads(text)


def _param_out(p):
    if p is None or math.isfinite(p):
        return p
    return "inf" if p > 0 else "-inf"


def to_json(d: Dendrogram, indent: int | None = None) -> str:
    """Lossless JSON; nodes are listed children-first, root last."""
    nodes = []
    for leaf in sorted(d.root.leaves(), key=lambda x: x.index):
        nodes.append({"id": leaf.id, "label": leaf.label, "index": leaf.index})
    for node in d.root.internal_nodes():
        nodes.append({"id": node.id, "height": node.height,
                      "interval": list(node.interval),
                      "children": [c.id for c in node.children]})
    doc = {
        "format": "multidendro.dendrogram",
        "version": SCHEMA_VERSION,
        "kind": d.kind,
        "digits": d.digits,
        "group": d.group,
        "method": {"name": d.spec.method, "weighted": d.spec.weighted,
                   "param": _param_out(d.spec.param)},
        "labels": list(d.labels),
        "nodes": nodes,
    }
    return json.dumps(doc, indent=indent, allow_nan=False)


def from_json(text: str) -> Dendrogram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"malformed JSON: {e}") from None
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as e:
        raise SerializationError(f"schema mismatch: {e.message}") from None
    kind = doc["kind"]
    param = doc["method"]["param"]
    if isinstance(param, str):
        param = math.inf if param == "inf" else -math.inf
    try:
        spec = MethodSpec(doc["method"]["name"], doc["method"]["weighted"], param)
    except ValueError as e:
        raise SerializationError(str(e)) from None
    built, used = {}, set()
    for rec in doc["nodes"]:
        if rec["id"] in built:
            raise SerializationError(f"duplicate node id {rec['id']}")
        if "label" in rec:
            node = ClusterNode(id=rec["id"], label=rec["label"],
                               index=rec["index"],
                               height=0.0 if kind == DISTANCE else 1.0)
        else:
            lo, hi = rec["interval"]
            if lo > hi:
                raise SerializationError(
                    f"node {rec['id']}: D_min {lo} exceeds D_max {hi}")
            kids = []
            for c in rec["children"]:
                if c not in built or c in used:
                    raise SerializationError(
                        f"node {rec['id']}: bad child reference {c}")
                used.add(c)
                kids.append(built[c])
            node = ClusterNode(id=rec["id"], children=kids,
                               leaf_count=sum(k.leaf_count for k in kids),
                               interval=(float(lo), float(hi)),
                               height=float(rec["height"]))
        built[rec["id"]] = node
    root = built[doc["nodes"][-1]["id"]]
    if len(used) != len(built) - 1:
        raise SerializationError("nodes do not form a single tree")
    d = Dendrogram(root, spec, kind, doc["digits"], tuple(doc["labels"]),
                   doc["group"])
    try:
        d.validate()
    except TreeError as e:
        raise SerializationError(str(e)) from None
    for leaf in root.leaves():
        if d.labels[leaf.index] != leaf.label:
            raise SerializationError(f"leaf {leaf.label!r} has a wrong index")
    return d
