import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numrad.errors import SpaceMismatch
from numrad.operators import (
    MatrixOperator,
    Tail,
    TailOperator,
    adjoint,
    apply,
    assemble_block,
    complement_projection,
    constant,
    dump_operator,
    finite,
    geometric,
    harmonic,
    identity,
    mideal_approximant,
    parse_operator,
    projection,
    rank_one,
    truncate,
)
from numrad.spaces import ScalarField, dsum, dual_space, lp, pairing, sample_norming_pairs

matrices = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.floats(-10, 10, allow_nan=False), min_size=n, max_size=n),
                       min_size=n, max_size=n))


def test_shape_checked():
    with pytest.raises(SpaceMismatch):
        MatrixOperator(np.eye(2), lp(3, 2), lp(3, 2))


def test_algebra_and_composition():
    s = lp(2, 3)
    A = MatrixOperator.on(s, [[1, 2], [3, 4]])
    I = identity(s)
    assert np.array_equal((A + I).entries, [[2, 2], [3, 5]])
    assert np.array_equal((A @ I).entries, A.entries)
    assert np.array_equal((A * 2 - A).entries, A.entries)
    assert np.array_equal(apply(A, [1, 0]), [1, 3])
    with pytest.raises(SpaceMismatch):
        A + identity(lp(2, 2))


@given(matrices, st.integers(0, 2**31 - 1))
def test_adjoint_is_the_transpose_pairing(rows, seed):
    n = len(rows)
    s = lp(n, 3, ScalarField.COMPLEX)
    T = MatrixOperator.on(s, np.array(rows) * (1 + 0.5j))
    Ta = adjoint(T)
    assert Ta.domain == dual_space(s)
    pair = sample_norming_pairs(s, 1, seed)[0]
    f, x = pair.functional, pair.point
    assert abs(pairing(Ta.entries @ f, x) - pairing(f, T.entries @ x)) <= 1e-9 * (1 + np.abs(T.entries).sum())


def test_rank_one_and_projections():
    s = lp(3, 2)
    K = rank_one([1, 0, 0], [0, 1, 0], s)
    assert np.array_equal(K.entries @ np.array([2.0, 5, 7]), [0, 2, 0])
    P, Q = projection(s, 2), complement_projection(s, 2)
    assert np.array_equal((P + Q).entries, np.eye(3))


def test_tail_families():
    i = np.array([1, 2, 4])
    assert np.allclose(Tail("harmonic", 2.0).at(i), [0, 1, 1.5])
    assert np.allclose(Tail("geometric", 1.0, 0.5).at(i), [0.5, 0.25, 0.0625])
    assert Tail("constant", -3).limit == -3
    with pytest.raises(ValueError):
        Tail("geometric", 1.0, 1.5)
    with pytest.raises(ValueError):
        Tail("cubic")


def test_tail_operator_truncation():
    T = harmonic(1.0, p=3, head=np.array([[5.0]]))
    M = truncate(T, 4)
    assert M.domain == lp(4, 3)
    assert np.allclose(np.diag(M.entries), [5, 0.5, 2 / 3, 0.75])
    assert T.limsup == 1.0 and not T.compact
    assert geometric(1.0, 0.5).compact
    with pytest.raises(ValueError):
        truncate(T, 0)


def test_declared_limsup_checked():
    with pytest.raises(ValueError):
        TailOperator(2, np.zeros((0, 0)), Tail("harmonic", 1.0), declared_limsup=0.5)


def test_tail_sums_fold_into_head():
    T = finite(np.ones((2, 2)), p=2) + constant(0.5, p=2)
    assert T.m == 2
    assert np.allclose(truncate(T, 3).entries, [[1.5, 1, 0], [1, 1.5, 0], [0, 0, 0.5]])
    assert (T - T).compact


@pytest.mark.parametrize("n", [0, 1, 3, 6])
def test_mideal_approximant_leaves_the_corner(n):
    T = harmonic(1.0, p=2, head=np.arange(16.0).reshape(4, 4))
    K = mideal_approximant(T, n)
    assert K.compact
    N = 10
    D = truncate(T, N).entries - truncate(K, N).entries
    P = np.diag((np.arange(N) < n).astype(float))
    Q = np.eye(N) - P
    assert np.allclose(D, Q @ truncate(T, N).entries @ Q)
    M = truncate(T, N)
    Km = mideal_approximant(M, n)
    assert np.allclose((M - Km).entries, D)


def test_assemble_block():
    s = dsum(2, lp(1, 2), lp(2, 2))
    B = MatrixOperator(np.array([[1.0], [2.0]]), lp(1, 2), lp(2, 2))
    T = assemble_block(s, s, {(1, 0): B})
    assert np.array_equal(T.entries, [[0, 0, 0], [1, 0, 0], [2, 0, 0]])


@given(matrices)
def test_matrix_literal_round_trip(rows):
    s = lp(len(rows), 2)
    T = parse_operator(json.dumps(rows), s)
    assert parse_operator(dump_operator(T), s).entries.tolist() == T.entries.tolist()


def test_tail_literal_round_trip():
    text = '{"p": "3", "head": [[0.5, 0.25], [0, 1]], "tail": {"kind": "harmonic", "c": 1.0}, "limsup": 1.0}'
    T = parse_operator(text)
    again = parse_operator(dump_operator(T))
    assert again.to_json() == T.to_json()
    assert T.p == 3 and T.limsup == 1.0


def test_complex_literal():
    s = lp(1, 2, ScalarField.COMPLEX)
    T = parse_operator('[[{"re": 0.5, "im": -1}]]', s)
    assert T.entries[0, 0] == 0.5 - 1j
    assert parse_operator(dump_operator(T), s).entries[0, 0] == 0.5 - 1j
