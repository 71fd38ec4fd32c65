import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numrad.errors import SpaceMismatch, UnsupportedSpace
from numrad.operators import MatrixOperator, adjoint, constant, finite, geometric, harmonic, rank_one
from numrad.radius import (
    CLOSED,
    EXACT,
    GRID,
    MULTISTART,
    adjoint_radius_check,
    essential_radius_exact,
    essential_radius_report,
    essential_radius_via_projections,
    extrapolate,
    numerical_index,
    numerical_radius,
    operator_norm,
    radius_exact_polyhedral,
    radius_grid,
    tail_radius_value,
    weak_essential_radius,
)
from numrad.spaces import INF, ScalarField, dsum, lp, norm, parse_space

# v(A) on real l_p^2, from a 4e6-point angle scan refined by 30-digit golden
# section with an independent implementation of the duality map
BRUTE_FORCE = [
    ([[1, 2], [3, 4]], 1.5, 5.372389762105725),
    ([[1, 2], [3, 4]], 3, 5.54720566497379),
    ([[0, 1], [0, 0]], 1.5, 0.5291336839893999),
    ([[0, 1], [0, 0]], 3, 0.5291336839893999),
    ([[2, -1], [0.5, 1]], 1.5, 2.0516922548518215),
    ([[2, -1], [0.5, 1]], 3, 2.240603905323232),
]


@pytest.mark.parametrize("A,p,expected", BRUTE_FORCE)
def test_frozen_brute_force_values(A, p, expected):
    T = MatrixOperator.on(lp(2, p), A)
    assert numerical_radius(T).value == pytest.approx(expected, abs=1e-10)
    assert radius_grid(T).value == pytest.approx(expected, abs=1e-10)


def test_rotation_has_zero_radius():
    T = MatrixOperator.on(lp(2, 2), [[0, -1], [1, 0]])
    assert numerical_radius(T).value == pytest.approx(0, abs=1e-12)
    assert numerical_radius(T, "multistart").value == pytest.approx(0, abs=1e-8)


def test_complex_shift_radius_is_half():
    T = MatrixOperator.on(lp(2, 2, ScalarField.COMPLEX), [[0, 1], [0, 0]])
    for method in ("auto", "multistart"):
        cert = numerical_radius(T, method)
        assert cert.value == pytest.approx(0.5, abs=1e-8)
        assert cert.witness_value(T) == pytest.approx(cert.value, abs=1e-8)


def test_zero_operator():
    T = MatrixOperator.on(lp(3, 3), np.zeros((3, 3)))
    assert numerical_radius(T).value == 0
    assert operator_norm(T).value == 0


def test_method_tags():
    A = [[1, 2], [0, 1]]
    assert numerical_radius(MatrixOperator.on(lp(2, INF), A)).method == CLOSED
    assert numerical_radius(MatrixOperator.on(lp(2, 3), A)).method == MULTISTART
    assert radius_grid(MatrixOperator.on(lp(2, 3), A)).method == GRID
    poly = MatrixOperator.on(parse_space("sum(inf; lp(2,1), lp(1,1))"), np.arange(9.0).reshape(3, 3))
    assert numerical_radius(poly).method == EXACT


@pytest.mark.parametrize("p", [1, INF])
def test_polyhedral_radius_equals_norm(p):
    T = MatrixOperator.on(lp(2, p), [[1, 2], [0, 1]])
    assert radius_exact_polyhedral(T).value == 3
    assert operator_norm(T).value == 3
    assert radius_grid(T).value == pytest.approx(3, abs=1e-12)


@given(st.integers(1, 3), st.sampled_from([1, INF]), st.integers(0, 2**31 - 1))
def test_polyhedral_closed_form_matches_enumeration(n, p, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    T = MatrixOperator.on(lp(n, p), A)
    closed = radius_exact_polyhedral(T)
    assert closed.value == operator_norm(T).value
    assert numerical_radius(T, "exact").value == pytest.approx(closed.value, abs=1e-12)
    assert closed.witness_value(T) == pytest.approx(closed.value, abs=1e-12)


@given(st.sampled_from([1.5, 2, 3]), st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_multistart_agrees_with_grid(p, n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    T = MatrixOperator.on(lp(n, p), A)
    assert numerical_radius(T, "multistart", seed=seed).value == pytest.approx(radius_grid(T).value, abs=1e-6)


@given(st.sampled_from([1.5, 3, 4]), st.integers(2, 4), st.booleans(), st.integers(0, 2**31 - 1))
def test_certificate_invariants(p, n, cplx, seed):
    field = ScalarField.COMPLEX if cplx else ScalarField.REAL
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
    T = MatrixOperator.on(lp(n, p, field), A)
    cert = numerical_radius(T, seed=seed)
    nT = operator_norm(T, seed=seed).value
    # v(T) <= ||T|| and the witness realizes v(T)
    assert cert.value <= nT + 1e-8
    assert cert.witness_value(T) >= cert.value - 1e-9
    assert max(cert.witness.residuals) <= 1e-9
    # v is a seminorm: homogeneous
    assert numerical_radius(T * 2.5, seed=seed).value == pytest.approx(2.5 * cert.value, rel=1e-7)


@given(st.sampled_from([1.5, 3]), st.integers(0, 2**31 - 1))
def test_radius_of_adjoint(p, seed):
    A = np.random.default_rng(seed).standard_normal((3, 3))
    r = adjoint_radius_check(MatrixOperator.on(lp(3, p), A), seed=seed)
    assert r["gap"] <= 1e-6


def test_radius_lower_bound_by_norm_over_e():
    # complex spaces: ||T|| <= e v(T)
    rng = np.random.default_rng(3)
    for p in (1.5, 2, 3):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        T = MatrixOperator.on(lp(3, p, ScalarField.COMPLEX), A)
        assert operator_norm(T).value <= np.e * numerical_radius(T).value + 1e-9


def test_direct_sum_blocks_combine_by_max():
    s = parse_space("sum(3; lp(2,3), lp(2,3))")
    A = np.zeros((4, 4))
    A[:2, :2] = [[1, 2], [3, 4]]
    A[2:, 2:] = [[2, -1], [0.5, 1]]
    assert numerical_radius(MatrixOperator.on(s, A)).value == pytest.approx(5.54720566497379, abs=1e-9)


def test_rank_one_radius():
    s = lp(3, 3)
    x = np.array([1.0, 0.5, 0.25])
    x /= norm(s, x)
    f = np.sign(x) * np.abs(x) ** 2
    K = rank_one(f, x, s)
    assert numerical_radius(K).value == pytest.approx(1, abs=1e-9)


def test_operator_norm_power_iteration():
    s = lp(3, 3)
    A = np.array([[1.0, 2, 0], [0, 1, -1], [1, 0, 1]])
    T = MatrixOperator.on(s, A)
    cert = operator_norm(T)
    # brute force over a fine sphere sample
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200000, 3))
    ratio = norm(s, X @ A.T) / norm(s, X)
    assert ratio.max() <= cert.value + 1e-12
    assert cert.value - ratio.max() < 1e-2
    assert operator_norm(adjoint(T)).value == pytest.approx(cert.value, abs=1e-9)


def test_input_validation():
    with pytest.raises(SpaceMismatch):
        numerical_radius(MatrixOperator(np.ones((2, 3)), lp(3, 2), lp(2, 2)))
    with pytest.raises(UnsupportedSpace):
        radius_exact_polyhedral(MatrixOperator.on(lp(2, 2), np.eye(2)))
    with pytest.raises(ValueError):
        numerical_radius(MatrixOperator.on(lp(2, 3), np.eye(2)), "magic")


def test_numerical_index_estimates():
    assert numerical_index(lp(2, 2)).value <= 1e-8
    assert numerical_index(lp(2, INF)).value == pytest.approx(1, abs=1e-9)
    assert numerical_index(parse_space("sum(inf; lp(2,inf), lp(2,inf))"),
                           {"candidates": 4, "refine": 0}).value == pytest.approx(1, abs=1e-9)


def test_extrapolation_recovers_a_plus_b_over_n():
    sched = [32, 64, 128, 256]
    ex = extrapolate(sched, [2 - 3 / N for N in sched])
    assert ex.extrapolated == pytest.approx(2, abs=1e-12)
    assert ex.cauchy


@pytest.mark.parametrize("p", [1.5, 2, 3])
@pytest.mark.parametrize("T_of_p,expected", [
    (lambda p: harmonic(1.0, p=p), 1.0),
    (lambda p: harmonic(-0.5, p=p), 0.5),
    (lambda p: constant(0.8, p=p, head=np.array([[3.0]])), 0.8),
    (lambda p: geometric(2.0, 0.5, p=p), 0.0),
    (lambda p: finite(np.ones((2, 2)), p=p), 0.0),
])
def test_essential_radius_three_ways(p, T_of_p, expected):
    T = T_of_p(p)
    rep = essential_radius_report(T, [32, 64, 128, 256])
    assert rep["exact"] == pytest.approx(expected)
    assert rep["max_pairwise_gap"] <= 1e-3
    assert weak_essential_radius(T).extrapolated == pytest.approx(expected, abs=1e-3)


def test_essential_radius_preconditions():
    with pytest.raises(UnsupportedSpace):
        essential_radius_exact(harmonic(1.0, p=1))
    with pytest.raises(ValueError):
        essential_radius_via_projections(harmonic(1.0), [64, 32])


def test_tail_radius_value_includes_head():
    T = harmonic(1.0, p=2, head=np.array([[3.0]]))
    assert tail_radius_value(T) == pytest.approx(3.0)
    assert tail_radius_value(harmonic(2.0, p=3)) == pytest.approx(2.0)


def test_sum_space_with_mixed_exponents():
    s = dsum(INF, lp(2, 2), lp(1, 2))
    T = MatrixOperator.on(s, np.diag([1.0, -2.0, 0.5]))
    assert numerical_radius(T).value == pytest.approx(2.0, abs=1e-8)


def test_row_sum_example():
    T = MatrixOperator.on(lp(2, INF), [[1, 1], [0, 0]])
    assert numerical_radius(T).value == 2
    assert radius_grid(T).value == pytest.approx(2, abs=1e-12)


def test_linf_and_l1_adjoint_pair():
    T = MatrixOperator.on(lp(2, INF), [[1, 2], [0, 1]])
    Ta = adjoint(T)
    assert Ta.domain == lp(2, 1)
    assert numerical_radius(T).value == numerical_radius(Ta).value == 3


@pytest.mark.parametrize("p", [1.5, 3])
def test_truncations_increase(p):
    from numrad.operators import TailOperator, Tail
    rng = np.random.default_rng(int(p * 10))
    for _ in range(5):
        T = TailOperator(p, rng.standard_normal((3, 3)) * 0.3, Tail("harmonic", float(rng.uniform(0.5, 2))))
        small = numerical_radius(T.truncate(64)).value
        assert small <= numerical_radius(T.truncate(128)).value + 1e-9
