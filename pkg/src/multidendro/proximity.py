"""Proximity matrices: ingestion, validation and resolution control."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DISTANCE = "distance"
SIMILARITY = "similarity"
KINDS = (DISTANCE, SIMILARITY)

FORMATS = ("square-csv", "lower-triangle-csv", "labeled-square-csv")

MAX_DIGITS = 15
SYMMETRY_RTOL = 1e-12


class ProximityError(ValueError):
    """Raised for malformed or invalid proximity data."""


def normalize_kind(kind: str) -> str:
    k = kind.lower()
    if k in ("dist", DISTANCE):
        return DISTANCE
    if k in ("sim", SIMILARITY):
        return SIMILARITY
    raise ProximityError(f"unknown proximity kind {kind!r}")


def condensed_index(n: int, i: int, j: int) -> int:
    """Position of pair (i, j), i != j, in a condensed vector of order n."""
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


def round_half_even(values, digits: int):
    """Round to `digits` decimals, ties to even, on the scaled value."""
    scale = 10.0 ** digits
    return np.rint(np.asarray(values, dtype=float) * scale) / scale


@dataclass(frozen=True, eq=False)
class ProximityMatrix:
    """Symmetric pairwise proximities stored as a condensed vector.

    `values` follows the usual condensed ordering: (0,1), (0,2), ...,
    (0,n-1), (1,2), ... which is the strictly lower triangle read
    column by column.
    """

    labels: tuple
    values: np.ndarray
    kind: str = DISTANCE
    digits: int | None = None
    _square: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        values = np.array(self.values, dtype=float).ravel()
        kind = normalize_kind(self.kind)
        n = len(labels)
        if n < 2:
            raise ProximityError("need at least two objects")
        if len(set(labels)) != n:
            raise ProximityError("labels must be unique")
        if values.size != n * (n - 1) // 2:
            raise ProximityError(
                f"{values.size} values do not match {n} objects")
        if not np.all(np.isfinite(values)):
            raise ProximityError("proximities must be finite")
        if np.any(values < 0):
            raise ProximityError("proximities must be nonnegative")
        if kind == SIMILARITY and np.any(values > 1.0):
            raise ProximityError("similarities must lie in [0, 1]")
        if self.digits is not None:
            _check_digits(self.digits)
            if not np.array_equal(values, round_half_even(values, self.digits)):
                raise ProximityError(
                    f"values are not quantized at digits={self.digits}")
        values.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self):
        return self.n

    def __getitem__(self, pair):
        i, j = pair
        if i == j:
            return 0.0 if self.kind == DISTANCE else 1.0
        return float(self.values[condensed_index(self.n, i, j)])

    def square(self) -> np.ndarray:
        """Full symmetric matrix; the diagonal holds the self-proximity."""
        if self._square is None:
            n = self.n
            sq = np.zeros((n, n))
            iu = np.triu_indices(n, 1)
            sq[iu] = self.values
            sq.T[iu] = self.values
            if self.kind == SIMILARITY:
                np.fill_diagonal(sq, 1.0)
            sq.setflags(write=False)
            object.__setattr__(self, "_square", sq)
        return self._square

    def permute(self, order: Sequence[int]) -> "ProximityMatrix":
        """Reorder rows and columns; labels travel with their rows."""
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise ProximityError("order must be a permutation of 0..n-1")
        sq = self.square()[np.ix_(order, order)]
        return ProximityMatrix(
            labels=[self.labels[k] for k in order],
            values=sq[np.triu_indices(self.n, 1)],
            kind=self.kind,
            digits=self.digits,
        )

    def with_values(self, values, digits=None) -> "ProximityMatrix":
        return ProximityMatrix(self.labels, values, self.kind, digits)

    @classmethod
    def from_square(cls, matrix, labels=None, kind=DISTANCE, digits=None):
        sq = np.asarray(matrix, dtype=float)
        _check_square(sq, normalize_kind(kind))
        n = sq.shape[0]
        if labels is None:
            labels = [str(k + 1) for k in range(n)]
        return cls(labels, sq.T[np.triu_indices(n, 1)], kind, digits)


def _check_digits(digits):
    if not isinstance(digits, (int, np.integer)) or digits < 0:
        raise ProximityError("digits must be a nonnegative integer")
    if digits > MAX_DIGITS:
        raise ProximityError(f"digits must be <= {MAX_DIGITS}")


def _check_square(sq: np.ndarray, kind: str):
    if sq.ndim != 2 or sq.shape[0] != sq.shape[1]:
        raise ProximityError("square matrix expected")
    n = sq.shape[0]
    if n < 2:
        raise ProximityError("need at least two objects")
    diff = np.abs(sq - sq.T)
    tol = SYMMETRY_RTOL * np.maximum(np.abs(sq), np.abs(sq.T))
    if np.any(diff > tol):
        i, j = np.argwhere(diff > tol)[0]
        raise ProximityError(f"matrix is not symmetric at ({i + 1}, {j + 1})")
    if kind == DISTANCE and np.any(np.diag(sq) != 0):
        raise ProximityError("distance matrix must have a zero diagonal")


def quantize(m: ProximityMatrix, digits: int) -> ProximityMatrix:
    """Round every proximity to `digits` decimals (ties to even)."""
    _check_digits(digits)
    q = round_half_even(m.values, digits)
    if m.kind == SIMILARITY:
        q = np.clip(q, 0.0, 1.0)
    return ProximityMatrix(m.labels, q, m.kind, digits)


def _rows(text: str) -> list[list[str]]:
    lines = [ln for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    return [[c.strip() for c in row] for row in csv.reader(lines)]


def _floats(cells: Iterable[str], lineno: int) -> list[float]:
    out = []
    for c in cells:
        try:
            out.append(float(c))
        except ValueError:
            raise ProximityError(f"row {lineno}: not a number: {c!r}") from None
    return out


def parse_proximity(text: str, format: str = "square-csv",
                    kind: str = DISTANCE) -> ProximityMatrix:
    """Parse CSV text in one of the supported layouts.

    square-csv
        n rows of n numbers.
    lower-triangle-csv
        n-1 rows; row k holds the k proximities between object k+1 and
        objects 1..k.
    labeled-square-csv
        a header row (first cell ignored) with the labels, then n rows
        each starting with the row label.
    """
    kind = normalize_kind(kind)
    fmt = {"square": "square-csv", "lower": "lower-triangle-csv",
           "labeled": "labeled-square-csv"}.get(format, format)
    rows = _rows(text)
    if not rows:
        raise ProximityError("no data")
    labels = None
    if fmt == "labeled-square-csv":
        labels = rows[0][1:]
        body = rows[1:]
        if len(body) != len(labels):
            raise ProximityError(
                f"{len(labels)} labels but {len(body)} data rows")
        for k, row in enumerate(body):
            if row[0] != labels[k]:
                raise ProximityError(
                    f"row label {row[0]!r} does not match column {labels[k]!r}")
        rows = [row[1:] for row in body]
        fmt = "square-csv"
    if fmt == "square-csv":
        n = len(rows)
        for k, row in enumerate(rows, 1):
            if len(row) != n:
                raise ProximityError(
                    f"ragged input: row {k} has {len(row)} fields, expected {n}")
        sq = np.array([_floats(r, k) for k, r in enumerate(rows, 1)])
        if np.any(sq < 0):
            raise ProximityError("proximities must be nonnegative")
        return ProximityMatrix.from_square(sq, labels, kind)
    if fmt == "lower-triangle-csv":
        n = len(rows) + 1
        sq = np.zeros((n, n))
        for k, row in enumerate(rows, 1):
            if len(row) != k:
                raise ProximityError(
                    f"ragged input: row {k} has {len(row)} fields, expected {k}")
            sq[k, :k] = _floats(row, k)
        sq = sq + sq.T
        if kind == SIMILARITY:
            np.fill_diagonal(sq, 1.0)
        return ProximityMatrix.from_square(sq, None, kind)
    raise ProximityError(f"unknown format {format!r}")


def to_csv(m: ProximityMatrix, format: str = "square-csv") -> str:
    """Serialize with shortest round-trip float formatting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    sq = m.square()
    n = m.n
    if format in ("square-csv", "square"):
        for i in range(n):
            w.writerow([repr(float(v)) for v in sq[i]])
    elif format in ("lower-triangle-csv", "lower"):
        for i in range(1, n):
            w.writerow([repr(float(v)) for v in sq[i, :i]])
    elif format in ("labeled-square-csv", "labeled"):
        w.writerow([""] + list(m.labels))
        for i in range(n):
            w.writerow([m.labels[i]] + [repr(float(v)) for v in sq[i]])
    else:
        raise ProximityError(f"unknown format {format!r}")
    return buf.getvalue()


def read_proximity(path, format="square-csv", kind=DISTANCE) -> ProximityMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_proximity(fh.read(), format, kind)
