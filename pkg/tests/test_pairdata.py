import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ugvq.errors import InputError, NeverCompared, SelfComparison, UnknownWinner
from ugvq.pairdata import (
    ComparisonGraph, adjacency_matrix, counts_to_csv, ingest_comparisons, preference_matrix,
    read_comparisons_csv, weight_matrix, winning_rate,
)


def test_ingest_accumulates_counts():
    g = ingest_comparisons([("A", "B", "A"), ("A", "B", "A"), ("A", "B", "B")])
    assert g.count("A", "B") == 2
    assert g.count("B", "A") == 1
    assert g.items == ("A", "B")
    assert g.n_records == 3


def test_empty_input():
    g = ingest_comparisons([])
    assert g.n_items == 0
    assert adjacency_matrix(g).shape == (0, 0)


def test_self_comparison():
    with pytest.raises(SelfComparison):
        ingest_comparisons([("A", "A", "A")])


def test_unknown_winner():
    with pytest.raises(UnknownWinner):
        ingest_comparisons([("A", "B", "C")])


def test_first_appearance_order():
    g = ingest_comparisons([("C", "A", "A"), ("B", "C", "B")])
    assert g.items == ("C", "A", "B")


@pytest.mark.parametrize("mij, mji, expected", [(3, 1, 0.75), (0, 5, 0.0)])
def test_winning_rate(mij, mji, expected):
    g = ComparisonGraph(("i", "j"), {("i", "j"): mij, ("j", "i"): mji})
    assert winning_rate(g, "i", "j") == expected


def test_winning_rate_never_compared():
    g = ComparisonGraph(("i", "j"), {})
    with pytest.raises(NeverCompared):
        winning_rate(g, "i", "j")


@pytest.mark.parametrize("mij, mji, y", [(1, 1, 0.0), (4, 0, 1.0), (3, 1, 0.5)])
def test_preference_values(mij, mji, y):
    g = ComparisonGraph(("i", "j"), {("i", "j"): mij, ("j", "i"): mji})
    flow = preference_matrix(g)
    assert flow.value(0, 1) == y
    assert flow.value(1, 0) == -y


def test_adjacency_layout():
    g = ingest_comparisons([("A", "B", "A"), ("A", "B", "A"), ("A", "B", "B")])
    assert adjacency_matrix(g).tolist() == [[0, 2], [1, 0]]


def test_adjacency_missing_edges_are_zero():
    g = ComparisonGraph(("A", "B", "C"), {("A", "B"): 1})
    M = adjacency_matrix(g)
    assert not M[2].any() and not M[:, 2].any()
    flow = preference_matrix(g)
    assert flow.edges.tolist() == [[0, 1]]
    with pytest.raises(NeverCompared):
        flow.value(0, 2)


records = st.lists(
    st.tuples(st.sampled_from("ABCDEF"), st.sampled_from("ABCDEF"), st.booleans())
    .filter(lambda t: t[0] != t[1])
    .map(lambda t: (t[0], t[1], t[0] if t[2] else t[1])),
    max_size=60,
)


@given(records)
def test_graph_invariants(recs):
    g = ingest_comparisons(recs)
    W = weight_matrix(g)
    assert np.array_equal(W, W.T)
    assert np.triu(W, 1).sum() == len(recs)
    for i, j in g.edges():
        a, b = g.items[i], g.items[j]
        assert winning_rate(g, a, b) + winning_rate(g, b, a) == 1.0
    Y = preference_matrix(g).to_dense()
    assert np.array_equal(Y, -Y.T)


@given(records)
def test_counts_csv_roundtrip(recs):
    g = ingest_comparisons(recs)
    text = counts_to_csv(g)
    back = read_comparisons_csv(io.StringIO(text))
    assert back == g
    assert back.items == g.items
    assert counts_to_csv(back) == text


def test_csv_reader_rejects_bad_header():
    with pytest.raises(InputError):
        read_comparisons_csv(io.StringIO("a,b,c\nx,y,x\n"))


def test_csv_reader_comparisons():
    g = read_comparisons_csv(io.StringIO("item_a,item_b,winner\nx,y,x\ny,x,y\n"))
    assert g.count("x", "y") == 1 and g.count("y", "x") == 1
