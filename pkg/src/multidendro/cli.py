"""Command-line interface.

    multidendro cluster --input d.csv --method complete --out summary
    multidendro sweep --input d.csv --method versatile --measure cor --params=-20:20:1
    multidendro permute --input d.csv --method arithmetic --group pair --trials 100
    multidendro enumerate --input d.csv --method arithmetic --limit 1000
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, serialize
from .descriptors import MEASURES, descriptor_set, summary
from .engine import cluster
from .linkage import METHODS, LinkageError, MethodSpec
from .plot import PlotOptions, render_dendrogram_svg, render_sweep_svg
from .proximity import ProximityError, ProximityMatrix, parse_proximity

OUTPUTS = ("json", "newick", "merges", "svg", "summary")
FILENAMES = {"json": "dendrogram.json", "newick": "dendrogram.nwk",
             "merges": "merges.csv", "svg": "dendrogram.svg",
             "summary": "summary.txt"}


class DataError(Exception):
    pass


def _real(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return v


def _params(text: str) -> list[float]:
    """'a:b:step' range (inclusive) or a comma list; 'inf'/'-inf' allowed."""
    if ":" in text:
        try:
            a, b, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [float(np.round(a + k * step, 12)) for k in range(count)]
    return [_real(x) for x in text.split(",") if x.strip()]


def _looks_labeled(text: str) -> bool:
    for line in text.splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            first = next(csv.reader([line]))[0].strip()
            try:
                float(first)
                return False
            except ValueError:
                return True
    return False


def _euclidean(text: str, kind: str) -> ProximityMatrix:
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and not r[0].lstrip().startswith("#")]
    labels = None
    try:
        float(rows[0][0])
    except ValueError:
        labels = [r[0].strip() for r in rows]
        rows = [r[1:] for r in rows]
    try:
        x = np.array([[float(c) for c in r] for r in rows])
    except ValueError as e:
        raise DataError(f"bad feature table: {e}") from None
    diff = x[:, None, :] - x[None, :, :]
    return ProximityMatrix.from_square(np.sqrt((diff ** 2).sum(-1)), labels, kind)


def load_matrix(args) -> ProximityMatrix:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {args.input}: {e.strerror}") from None
    fmt = args.format
    if fmt == "features":
        return _euclidean(text, args.kind)
    if fmt == "auto":
        fmt = "labeled" if _looks_labeled(text) else "square"
    return parse_proximity(text, fmt, args.kind)


def _spec(args) -> MethodSpec:
    return MethodSpec(args.method, args.weighted, args.par)


def _emit(args, name: str, text: str, out=None):
    out = out or sys.stdout
    if args.out_dir:
        path = Path(args.out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        out.write(text)
        if not text.endswith("\n"):
            out.write("\n")


def cmd_cluster(args, out):
    m = load_matrix(args)
    spec = _spec(args)
    d = cluster(m, spec, args.group, args.digits)
    for kind in args.out or ["summary"]:
        if kind == "json":
            text = serialize.to_json(d, indent=1)
        elif kind == "newick":
            text = serialize.to_newick(d)
        elif kind == "merges":
            text = serialize.to_merge_table(d).to_csv()
        elif kind == "svg":
            fill = None if args.no_ranges else "pink"
            text = render_dendrogram_svg(
                d, PlotOptions(range_fill=fill, title=args.title or ""))
        else:
            text = summary(d, descriptor_set(d, m), source=Path(args.input).name)
        _emit(args, FILENAMES[kind], text, out)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "NA"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def cmd_sweep(args, out):
    m = load_matrix(args)
    spec = MethodSpec(args.method, args.weighted, args.params[0])
    pts = diagnostics.descriptor_sweep(m, spec, args.measure, args.params,
                                       args.group, args.digits)
    _emit(args, "sweep.csv", _csv(pts, ["param", args.measure]), out)
    if args.svg:
        svg = render_sweep_svg(pts, args.measure,
                               PlotOptions(title=args.title or args.measure))
        Path(args.svg).write_text(svg, encoding="utf-8")


def cmd_permute(args, out):
    m = load_matrix(args)
    vals = diagnostics.permutation_study(m, _spec(args), args.group,
                                         args.digits, args.trials, args.seed,
                                         args.measure)
    _emit(args, "permute.csv", _csv([(v,) for v in vals], [args.measure]), out)


def cmd_enumerate(args, out):
    m = load_matrix(args)
    count, exhausted = diagnostics.enumerate_pair_dendrograms(
        m, _spec(args), args.digits, args.limit)
    _emit(args, "enumerate.txt",
          f"count: {count}\nexhausted: {'true' if exhausted else 'false'}\n", out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multidendro",
        description="Agglomerative hierarchical clustering with multidendrograms.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, metavar="PATH")
    common.add_argument("--format", default="auto",
                        choices=["auto", "square", "lower", "labeled", "features"],
                        help="CSV layout; 'features' computes Euclidean distances "
                             "between rows")
    common.add_argument("--kind", default="dist", choices=["dist", "sim"])
    common.add_argument("--method", default="arithmetic", choices=METHODS)
    common.add_argument("--par", type=_real, default=None,
                        help="parameter for flexible (beta) or versatile (p)")
    wg = common.add_mutually_exclusive_group()
    wg.add_argument("--weighted", dest="weighted", action="store_true")
    wg.add_argument("--unweighted", dest="weighted", action="store_false")
    common.set_defaults(weighted=False)
    common.add_argument("--group", default="variable", choices=["pair", "variable"])
    common.add_argument("--digits", type=int, default=None)
    common.add_argument("--out-dir", default=None, metavar="PATH")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--title", default=None)

    c = sub.add_parser("cluster", parents=[common], help="build a dendrogram")
    c.add_argument("--out", action="append", choices=OUTPUTS)
    c.add_argument("--no-ranges", action="store_true",
                   help="hide fusion-interval rectangles in SVG output")
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", parents=[common],
                       help="descriptor values over a parameter grid")
    s.add_argument("--measure", default="cor", choices=MEASURES)
    s.add_argument("--params", type=_params, required=True)
    s.add_argument("--svg", default=None, metavar="PATH")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("permute", parents=[common],
                       help="descriptor values over random input orders")
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--measure", default="cor", choices=MEASURES)
    r.set_defaults(func=cmd_permute)

    e = sub.add_parser("enumerate", parents=[common],
                       help="count distinct pair-group dendrograms")
    e.add_argument("--limit", type=int, default=10_000)
    e.set_defaults(func=cmd_enumerate)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "sweep" and args.method not in ("flexible", "versatile"):
        print(f"{parser.prog}: error: sweep needs a parametric method "
              "(flexible or versatile)", file=err)
        return 2
    try:
        args.func(args, out)
    except LinkageError as e:
        print(f"{parser.prog}: error: {e}", file=err)
        return 2
    except (ProximityError, DataError, serialize.SerializationError,
            ValueError) as e:
        print(f"{parser.prog}: error: {e}", file=err)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
