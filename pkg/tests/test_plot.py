import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from multidendro import MethodSpec, ProximityMatrix, cluster
from multidendro.diagnostics import descriptor_sweep
from multidendro.plot import PlotOptions, nice_ticks, render_dendrogram_svg, render_sweep_svg

NS = {"s": "http://www.w3.org/2000/svg"}


def parse(svg):
    return ET.fromstring(svg.encode("utf-8"))


def tick_positions(root):
    """Map tick value -> y coordinate."""
    labels = [t for t in root.iterfind("s:text", NS) if t.get("class") == "ytick"]
    lines = [t for t in root.iterfind("s:line", NS) if t.get("class") == "ytick"]
    return {float(t.text): float(ln.get("y1")) for t, ln in zip(labels, lines)}


def test_toy_range_rectangle(toy):
    root = parse(render_dendrogram_svg(cluster(toy, "arithmetic")))
    rects = root.findall("s:rect", NS)
    assert len(rects) == 1
    ticks = tick_positions(root)
    y, h = float(rects[0].get("y")), float(rects[0].get("height"))
    assert y == pytest.approx(ticks[4.0], abs=0.011)
    assert y + h == pytest.approx(ticks[2.0], abs=0.011)
    assert rects[0].get("fill") == "pink"


def test_no_range_fill(toy):
    root = parse(render_dendrogram_svg(cluster(toy, "arithmetic"),
                                       PlotOptions(range_fill=None)))
    assert root.findall("s:rect", NS) == []
    ticks = tick_positions(root)
    joins = [ln for ln in root.iterfind("s:line", NS) if ln.get("class") == "join"]
    assert sorted(float(j.get("y1")) for j in joins) == pytest.approx(
        sorted([ticks[2.0], ticks[5.0]]), abs=0.011)


def test_two_leaf_bracket():
    d = cluster(ProximityMatrix(["a", "b"], [5.0]), "single")
    root = parse(render_dendrogram_svg(d))
    joins = [ln for ln in root.iterfind("s:line", NS) if ln.get("class") == "join"]
    leaves = [t.text for t in root.iterfind("s:text", NS) if t.get("class") == "leaf"]
    assert len(joins) == 1 and sorted(leaves) == ["a", "b"]


def test_similarity_axis_reversed():
    s = ProximityMatrix(list("abc"), [0.9, 0.2, 0.3], kind="similarity")
    root = parse(render_dendrogram_svg(cluster(s, "single")))
    ticks = tick_positions(root)
    # higher similarity sits lower, next to the leaves
    lo = min(ticks)
    assert ticks[1.0] > ticks[lo]


def test_dendrogram_svg_deterministic(cities):
    d = cluster(cities, "complete")
    assert render_dendrogram_svg(d) == render_dendrogram_svg(cluster(cities, "complete"))


def test_sweep_markers_collinear():
    root = parse(render_sweep_svg([(0, 0.0), (1, 1.0), (2, 2.0)], "cor"))
    assert len(root.findall("s:polyline", NS)) == 1
    assert len(root.findall("s:circle", NS)) == 3


def test_flexible_sweep_has_21_markers(cities):
    betas = np.round(np.arange(-1, 1.0001, 0.1), 10)
    pts = descriptor_sweep(cities, MethodSpec("flexible", False, 0.0), "cor", betas)
    root = parse(render_sweep_svg(pts, "cor"))
    assert len(root.findall("s:circle", NS)) == 21
    # the flat tree at beta = 1 has no defined cor: hollow marker, broken line
    assert math.isnan(pts[-1][1])
    assert sum("na" in c.get("class").split() for c in root.findall("s:circle", NS)) == 1


def test_infinite_parameter_ticks(cities):
    params = [-math.inf] + list(range(-20, 21)) + [math.inf]
    pts = descriptor_sweep(cities, MethodSpec("versatile", False, 1.0), "cor", params)
    root = parse(render_sweep_svg(pts, "cor"))
    xt = [t.text for t in root.iterfind("s:text", NS) if t.get("class") == "xtick"]
    assert xt[0] == "-Inf" and xt[-1] == "+Inf"
    assert len(root.findall("s:circle", NS)) == 43


def test_nice_ticks():
    assert nice_ticks(0, 5) == [0, 1, 2, 3, 4, 5]
    assert nice_ticks(0, 1) == [0, 0.2, 0.4, 0.6, 0.8, 1.0]


def test_label_escaping():
    d = cluster(ProximityMatrix(["<a>", "b&c"], [1.0]), "single")
    leaves = {t.text for t in parse(render_dendrogram_svg(d)).iterfind("s:text", NS)}
    assert {"<a>", "b&c"} <= leaves
