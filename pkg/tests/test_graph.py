import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaeisumm.graph import build_adjacency, cosine_matrix, cosine_similarity, normalize_adjacency
from gaeisumm.numerics import DegenerateInputError, DimensionError

rows = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 4)),
              elements=st.floats(0.1, 5.0))


@pytest.mark.parametrize("u, v, want", [([1, 0], [1, 0], 1.0), ([1, 0], [0, 1], 0.0),
                                        ([1, 1], [1, 0], 0.70711)])
def test_cosine_examples(u, v, want):
    assert cosine_similarity(u, v) == pytest.approx(want, abs=1e-5)


def test_cosine_zero_vector():
    with pytest.raises(DegenerateInputError):
        cosine_similarity([0, 0], [1, 0])


def test_cosine_length_mismatch():
    with pytest.raises(DimensionError):
        cosine_similarity([1, 0, 0], [1, 0])


def test_zero_row_is_named():
    with pytest.raises(DegenerateInputError, match="row 1"):
        cosine_matrix([[1.0, 0.0], [0.0, 0.0]])


def test_identical_rows():
    g = build_adjacency([[1.0, 2.0], [1.0, 2.0]])
    assert np.allclose(g.adjacency, [[0, 1], [1, 0]])


def test_orthogonal_rows_isolated():
    g = build_adjacency([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(g.adjacency, np.zeros((2, 2)))
    assert np.allclose(g.normalized, np.eye(2))


def test_hand_cosine_edge():
    g = build_adjacency([[1.0, 0.0], [1.0, 1.0]])
    assert g.adjacency[0, 1] == pytest.approx(0.70711, abs=1e-5)


def test_negative_cosine_is_clamped():
    g = build_adjacency([[1.0, 0.0], [-1.0, 0.1]])
    assert g.adjacency[0, 1] == 0.0


def test_min_edge_weight_drops_weak_edges():
    X = [[1.0, 0.0], [1.0, 1.0], [1.0, 0.05]]
    g = build_adjacency(X, min_edge_weight=0.8)
    assert g.adjacency[0, 1] == 0.0 and g.adjacency[0, 2] > 0.8


@pytest.mark.parametrize("A, want", [(np.zeros((2, 2)), np.eye(2)),
                                     ([[0, 1], [1, 0]], [[0.5, 0.5], [0.5, 0.5]]),
                                     ([[0]], [[1]])])
def test_normalize_examples(A, want):
    assert np.allclose(normalize_adjacency(A), want)


@given(rows)
def test_adjacency_invariants(X):
    g = build_adjacency(X)
    A = g.adjacency
    assert np.array_equal(A, A.T)
    assert np.all(A >= 0) and np.all(A <= 1)
    assert np.all(np.diag(A) == 0)
    assert np.array_equal(g.normalized, g.normalized.T)
    # the normalized operator has spectral radius at most 1
    assert np.abs(np.linalg.eigvalsh(g.normalized)).max() <= 1 + 1e-9
