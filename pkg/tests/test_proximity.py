import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multidendro import ProximityMatrix, parse_proximity, quantize
from multidendro.data import path
from multidendro.proximity import (ProximityError, condensed_index,
                                   round_half_even, to_csv)

from conftest import TOY


def test_toy_square_text():
    text = "0,2,4,7\n2,0,2,5\n4,2,0,3\n7,5,3,0\n"
    m = parse_proximity(text, "square-csv")
    assert m.n == 4
    assert sorted(m.values) == [2, 2, 3, 4, 5, 7]
    assert m[0, 3] == 7 and m[3, 0] == 7 and m[2, 3] == 3


def test_minimal_matrix():
    m = parse_proximity("0,5\n5,0", "square")
    assert list(m.values) == [5.0]


def test_lower_triangle_and_labeled():
    low = parse_proximity("2\n4,2\n7,5,3\n", "lower")
    lab = parse_proximity(",a,b,c,d\na,0,2,4,7\nb,2,0,2,5\nc,4,2,0,3\nd,7,5,3,0\n",
                          "labeled")
    sq = ProximityMatrix.from_square(TOY)
    assert np.array_equal(low.values, sq.values)
    assert np.array_equal(lab.values, sq.values)
    assert lab.labels == ("a", "b", "c", "d")


def test_uscities_fixture_independently():
    # plain csv reading, no package code
    with open(path("uscities"), newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0][1:], rows[1:]
    assert len(header) == 10 and len(body) == 10
    a = np.array([[float(x) for x in r[1:]] for r in body])
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert [r[0] for r in body] == header
    i, j = header.index("Atlanta"), header.index("Chicago")
    assert a[i, j] == 587


@pytest.mark.parametrize("text, fmt", [
    ("0,1\n2,0", "square"),            # asymmetric
    ("1,1\n1,0", "square"),            # nonzero diagonal
    ("0,-1\n-1,0", "square"),          # negative
    ("0,1,2\n1,0", "square"),          # ragged
    ("0,x\nx,0", "square"),            # not a number
    ("0,nan\nnan,0", "square"),
    ("0", "square"),                   # n < 2
    (",a,a\na,0,1\na,1,0", "labeled"),  # duplicate labels
])
def test_parse_errors(text, fmt):
    with pytest.raises(ProximityError):
        parse_proximity(text, fmt)


def test_similarity_bounds():
    m = parse_proximity("1,0.4\n0.4,1", "square", kind="sim")
    assert m.kind == "similarity"
    with pytest.raises(ProximityError):
        parse_proximity("1,1.5\n1.5,1", "square", kind="sim")


def test_quantize_examples():
    v = round_half_even(np.array([2.04, 2.049, 2.051]), 1)
    assert list(v) == [2.0, 2.0, 2.1]
    assert round_half_even(0.25, 1) == 0.2 and round_half_even(0.35, 1) == 0.4


def test_quantize_toy_fixed_point(toy):
    assert np.array_equal(quantize(toy, 0).values, toy.values)


def test_unquantized_values_rejected():
    with pytest.raises(ProximityError):
        ProximityMatrix(["a", "b"], [1.23], digits=1)


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=20),
       st.integers(0, 6))
def test_quantize_idempotent(vals, digits):
    once = round_half_even(np.array(vals), digits)
    assert np.array_equal(round_half_even(once, digits), once)


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_csv_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    m = ProximityMatrix([f"p{i}" for i in range(n)],
                        rng.uniform(0, 100, n * (n - 1) // 2))
    for fmt in ("square-csv", "lower-triangle-csv", "labeled-square-csv"):
        back = parse_proximity(to_csv(m, fmt), fmt)
        assert np.array_equal(back.values, m.values)
    assert parse_proximity(to_csv(m, "labeled"), "labeled").labels == m.labels


@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_square_and_permute(n, seed):
    rng = np.random.default_rng(seed)
    m = ProximityMatrix([str(i) for i in range(n)],
                        rng.uniform(0, 9, n * (n - 1) // 2))
    sq = m.square()
    assert np.array_equal(sq, sq.T)
    for i in range(n):
        for j in range(i + 1, n):
            assert sq[i, j] == m.values[condensed_index(n, i, j)]
    order = rng.permutation(n)
    p = m.permute(order)
    assert np.array_equal(p.square(), sq[np.ix_(order, order)])
    assert p.labels == tuple(m.labels[k] for k in order)
