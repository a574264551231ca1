"""Standalone SVG rendering of dendrograms and descriptor sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from .proximity import DISTANCE
from .tree import Dendrogram


@dataclass(frozen=True)
class PlotOptions:
    range_fill: str | None = "pink"
    label_size: float = 11.0
    height_axis: tuple[float, float] | None = None
    title: str = ""
    orientation: str = "vertical"
    width: float | None = None
    height: float = 420.0
    line_color: str = "black"

    def __post_init__(self):
        if self.height_axis is not None:
            lo, hi = self.height_axis
            if not lo < hi:
                raise ValueError("height_axis needs lo < hi")
        if self.orientation != "vertical":
            raise ValueError("only vertical orientation is supported")


def _f(x: float) -> str:
    return f"{x:.2f}"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _tick_label(v: float) -> str:
    return f"{v:g}"


class _Doc:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def add(self, s):
        self.parts.append(s)

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0, cls=None):
        extra = f' class="{cls}"' if cls else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" '
                 f'y2="{_f(y2)}" stroke="{stroke}" stroke-width="{width:g}"{extra}/>')

    def text(self, x, y, s, size, anchor="middle", rotate=None, cls=None):
        attrs = f'x="{_f(x)}" y="{_f(y)}" font-size="{size:g}" text-anchor="{anchor}"'
        if rotate is not None:
            attrs += f' transform="rotate({rotate:g} {_f(x)} {_f(y)})"'
        if cls:
            attrs += f' class="{cls}"'
        self.add(f"<text {attrs}>{escape(s)}</text>")

    def render(self, title=""):
        head = ('<?xml version="1.0" encoding="UTF-8"?>\n'
                '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{_f(self.width)}" height="{_f(self.height)}" '
                f'viewBox="0 0 {_f(self.width)} {_f(self.height)}" '
                'font-family="sans-serif">\n')
        if title:
            head += f"<title>{escape(title)}</title>\n"
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _vertical_axis(doc, x, y_of, lo, hi, size, ticks=None):
    doc.line(x, y_of(lo), x, y_of(hi))
    for t in ticks if ticks is not None else nice_ticks(lo, hi):
        y = y_of(t)
        doc.line(x - 4, y, x, y, cls="ytick")
        doc.text(x - 6, y + size / 3, _tick_label(t), size, anchor="end",
                 cls="ytick")


def render_dendrogram_svg(d: Dendrogram, opts: PlotOptions | None = None) -> str:
    """Vertical dendrogram; tied merges get a fusion-interval rectangle.

    Distances grow upward from 0.  Similarity dendrograms use a reversed
    axis starting at 1.0 at the leaves.
    """
    opts = opts or PlotOptions()
    sim = d.kind != DISTANCE
    leaves = []
    stack = [d.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            leaves.append(node)
        else:
            stack.extend(reversed(node.ordered_children()))
    nodes = d.internal_nodes()

    heights = [x.dmin for x in nodes] + [x.dmax for x in nodes] + [d.base]
    if opts.height_axis is not None:
        lo, hi = opts.height_axis
    elif sim:
        lo, hi = min(heights), 1.0
    else:
        lo, hi = min(heights), max(heights)
    if hi <= lo:
        hi = lo + 1.0

    size = opts.label_size
    left, right, top = 64.0, 24.0, 40.0 if opts.title else 20.0
    longest = max(len(x.label) for x in leaves)
    bottom = 16.0 + 0.62 * size * longest
    step = max(2.2 * size, 14.0)
    width = opts.width or left + right + step * len(leaves)
    plot_h = opts.height - top - bottom
    span = (width - left - right) / len(leaves)

    def y_of(h):
        frac = (hi - h) / (hi - lo) if sim else (h - lo) / (hi - lo)
        return top + plot_h * (1.0 - frac)

    xs = {}
    for k, leaf in enumerate(leaves):
        xs[id(leaf)] = left + span * (k + 0.5)
    for node in nodes:
        xs[id(node)] = sum(xs[id(c)] for c in node.children) / len(node.children)

    doc = _Doc(width, opts.height)
    if opts.title:
        doc.text(width / 2, 24, opts.title, size + 3)
    ticks = [t for t in nice_ticks(lo, hi)]
    if sim:
        ticks = [t for t in ticks if lo <= t <= hi]
    _vertical_axis(doc, left - 12, y_of, lo, hi, size * 0.9, ticks)

    if opts.range_fill is not None:
        for node in nodes:
            if not node.tied:
                continue
            kx = [xs[id(c)] for c in node.children]
            y1, y2 = sorted((y_of(node.dmin), y_of(node.dmax)))
            doc.add(f'<rect x="{_f(min(kx))}" y="{_f(y1)}" '
                    f'width="{_f(max(kx) - min(kx))}" height="{_f(y2 - y1)}" '
                    f'fill={quoteattr(opts.range_fill)} stroke="none"/>')

    for node in nodes:
        yh = y_of(node.height)
        kx = [xs[id(c)] for c in node.children]
        for c in node.children:
            doc.line(xs[id(c)], y_of(c.height), xs[id(c)], yh, opts.line_color)
        doc.line(min(kx), yh, max(kx), yh, opts.line_color, cls="join")

    base_y = y_of(d.base)
    for leaf in leaves:
        x = xs[id(leaf)]
        doc.text(x + size / 3, base_y + 6, leaf.label, size, anchor="end",
                 rotate=-90, cls="leaf")
    return doc.render(opts.title)


def render_sweep_svg(points, measure_name: str,
                     opts: PlotOptions | None = None) -> str:
    """Line-and-marker plot of (parameter, value) pairs.

    Infinite parameters sit at padded ends of the x axis with "-Inf" or
    "+Inf" ticks.  Undefined values are shown as hollow markers on the
    bottom edge and break the line.
    """
    opts = opts or PlotOptions()
    pts = [(float(p), float(v)) for p, v in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    finite_p = [p for p, _ in pts if math.isfinite(p)]
    a, b = (min(finite_p), max(finite_p)) if finite_p else (0.0, 1.0)
    pad = 0.08 * (b - a) if b > a else 1.0

    def px(p):
        if p == -math.inf:
            return a - pad
        if p == math.inf:
            return b + pad
        return p

    xlo = a - pad if any(p == -math.inf for p, _ in pts) else a
    xhi = b + pad if any(p == math.inf for p, _ in pts) else b
    if xhi <= xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    vals = [v for _, v in pts if math.isfinite(v)]
    ylo, yhi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if yhi <= ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    ypad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - ypad, yhi + ypad
    if opts.height_axis is not None:
        ylo, yhi = opts.height_axis

    size = opts.label_size
    width = opts.width or 480.0
    left, right, top, bottom = 64.0, 20.0, 40.0 if opts.title else 20.0, 48.0
    plot_w = width - left - right
    plot_h = opts.height - top - bottom

    def X(p):
        return left + plot_w * (px(p) - xlo) / (xhi - xlo)

    def Y(v):
        return top + plot_h * (1.0 - (v - ylo) / (yhi - ylo))

    doc = _Doc(width, opts.height)
    if opts.title:
        doc.text(width / 2, 24, opts.title, size + 3)
    _vertical_axis(doc, left, Y, ylo, yhi, size * 0.9)
    doc.line(left, Y(ylo), left + plot_w, Y(ylo))
    xticks = [(t, _tick_label(t)) for t in nice_ticks(a, b) if a <= t <= b]
    if any(p == -math.inf for p, _ in pts):
        xticks.insert(0, (-math.inf, "-Inf"))
    if any(p == math.inf for p, _ in pts):
        xticks.append((math.inf, "+Inf"))
    for t, lab in xticks:
        x = X(t)
        doc.line(x, Y(ylo), x, Y(ylo) + 4)
        doc.text(x, Y(ylo) + 6 + size, lab, size * 0.9, cls="xtick")
    doc.text(left + plot_w / 2, opts.height - 8, "parameter", size)
    doc.text(16, top + plot_h / 2, measure_name, size, rotate=-90)

    segment = []
    segments = []
    for p, v in pts:
        if math.isfinite(v):
            segment.append(f"{_f(X(p))},{_f(Y(v))}")
        elif segment:
            segments.append(segment)
            segment = []
    if segment:
        segments.append(segment)
    for seg in segments:
        doc.add(f'<polyline points="{" ".join(seg)}" fill="none" '
                f'stroke="blue" stroke-width="1.5"/>')
    for p, v in pts:
        if math.isfinite(v):
            doc.add(f'<circle cx="{_f(X(p))}" cy="{_f(Y(v))}" r="3" '
                    'fill="blue" class="marker"/>')
        else:
            doc.add(f'<circle cx="{_f(X(p))}" cy="{_f(Y(ylo))}" r="3" '
                    'fill="none" stroke="blue" class="marker na"/>')
    return doc.render(opts.title)
