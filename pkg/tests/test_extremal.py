import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numrad.errors import NotAttaining, PreconditionError
from numrad.extremal import (
    acpp_check,
    attaining_perturbation,
    build_counterexample_S,
    counterexample_norm_formula,
    farthest_distance_check,
    farthest_point_construct,
    verify_counterexample,
)
from numrad.operators import MatrixOperator, constant, finite, harmonic, identity
from numrad.radius import Diagnostics, RadiusCertificate, numerical_radius
from numrad.spaces import INF, ScalarField, lp

# sup_t (t^{3/2} + (1 - t^2)^{3/4})^{2/3} by 30-digit root finding on the derivative
ORACLE_3_2 = 1.12246204830937298


def test_farthest_identity_and_rotation():
    I = identity(lp(3, 3))
    assert numerical_radius(I - farthest_point_construct(I)).value == pytest.approx(2, abs=1e-9)
    R = MatrixOperator.on(lp(2, 2), [[0, -1], [1, 0]])
    assert numerical_radius(R - farthest_point_construct(R)).value == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("p", [2, 3])
def test_farthest_distance_check(p):
    A = np.random.default_rng(p).standard_normal((4, 4))
    rep = farthest_distance_check(MatrixOperator.on(lp(4, p), A), 0.01, samples=15)
    assert rep.ok
    assert rep.v_T_minus_K == pytest.approx(rep.vT + 1, abs=1e-6)
    assert rep.to_json()["ok"]


@settings(max_examples=10)
@given(st.sampled_from([1.5, 2, 3]), st.booleans(), st.integers(0, 2**31 - 1))
def test_farthest_point_distance_is_v_plus_one(p, cplx, seed):
    field = ScalarField.COMPLEX if cplx else ScalarField.REAL
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3)) + (1j * rng.standard_normal((3, 3)) if cplx else 0)
    T = MatrixOperator.on(lp(3, p, field), A)
    vT = numerical_radius(T, seed=seed).value
    K = farthest_point_construct(T, seed=seed)
    assert numerical_radius(K, seed=seed).value == pytest.approx(1, abs=1e-6)
    assert numerical_radius(T - K, seed=seed).value >= vT + 1 - 1e-6


def test_farthest_refuses_unreproduced_witness():
    T = MatrixOperator.on(lp(2, 3), np.eye(2))
    cert = RadiusCertificate(1.0, np.array([1.0, 0]), np.array([1.0, 0]), 1.0, "MultiStart",
                             Diagnostics(starts=4, converged=False, agreeing=1), lp(2, 3))
    with pytest.raises(NotAttaining):
        farthest_point_construct(T, cert=cert)


@pytest.mark.parametrize("p", [1.5, 2, 3])
@pytest.mark.parametrize("c,m", [(0.5, 0), (1.0, 2), (2.0, 4)])
def test_acpp(p, c, m):
    H = np.random.default_rng(m).standard_normal((m, m))
    if m:
        H *= 0.5 * c / numerical_radius(MatrixOperator.on(lp(m, p), H)).value
    T = harmonic(c, p=p, head=H)
    r = acpp_check(T)
    assert r["gap"] <= 1e-3
    assert r["monotone"]


def test_acpp_preconditions():
    with pytest.raises(PreconditionError):
        acpp_check(finite(np.eye(2), p=2))
    with pytest.raises(PreconditionError):
        acpp_check(constant(1.0, p=2))
    with pytest.raises(PreconditionError):
        acpp_check(harmonic(1.0, p=2, head=np.array([[2.0]])))
    with pytest.raises(PreconditionError):
        acpp_check(harmonic(1.0, p=1))


@pytest.mark.parametrize("T", [harmonic(1.0, p=2), harmonic(2.0, p=3), finite(np.zeros((0, 0)), p=2),
                               constant(0.5, p=1.5)])
@pytest.mark.parametrize("eps", [0.1, 0.4])
def test_attaining_perturbation(T, eps):
    r = attaining_perturbation(T, eps)
    assert r["ok"]
    assert r["distance"] == pytest.approx(eps / 2)
    assert r["U"].limsup == T.limsup


def test_counterexample_formula():
    assert counterexample_norm_formula(2, 1) == pytest.approx(2 ** 0.5, abs=1e-15)
    assert counterexample_norm_formula(3, 2) == pytest.approx(ORACLE_3_2, abs=1e-12)
    assert counterexample_norm_formula(3, 1) == pytest.approx(2 ** (2 / 3), abs=1e-15)
    # the adjoint norm increases with the diagonal's norm
    assert counterexample_norm_formula(4, 2, 0.9) < counterexample_norm_formula(4, 2)


@pytest.mark.parametrize("p,q", [(2, 1), (3, 1), (3, 2), (4, 2)])
@pytest.mark.parametrize("outer", [INF, 1])
def test_counterexample_constants(p, q, outer):
    S = build_counterexample_S(64, 2, p, q, outer)
    rep = verify_counterexample(S, (32, 64, 128))
    assert rep.ok
    assert rep.norm_S == pytest.approx(counterexample_norm_formula(p, q), abs=1e-3)
    assert rep.ve_S_upper <= 1 + 1e-6 < rep.v_S


def test_counterexample_real_field_is_flagged():
    S = build_counterexample_S(16, 2, 2, 1, INF, ScalarField.REAL)
    rep = verify_counterexample(S, (16, 32))
    assert rep.flags["real_field"]
    assert "summand_index_estimate" in rep.flags


def test_counterexample_structure():
    S = build_counterexample_S(8, 3, 3, 2, 1)
    M = S.truncate()
    assert M.domain.dim == 2 * 8 + 2
    V = S.compact_correction()
    assert np.count_nonzero(V.entries) == 1
    assert S.tag()["outer"] == "1"


@pytest.mark.parametrize("args", [(8, 2, 1, 2, INF), (8, 2, 2, 2, INF), (8, 1, 2, 1, INF), (8, 2, 2, 1, 2),
                                  (8, 2, INF, 1, INF)])
def test_counterexample_preconditions(args):
    with pytest.raises(PreconditionError):
        build_counterexample_S(*args)


def test_antisymmetric_farthest_point():
    T = MatrixOperator.on(lp(2, 2), [[0, 1], [-1, 0]])
    K = farthest_point_construct(T)
    assert numerical_radius(T - K).value == pytest.approx(1, abs=1e-9)


def test_perturbation_strict_gap():
    r = attaining_perturbation(harmonic(1.0, p=2), 0.4)
    assert r["ve"] == 1
    assert r["vU_lower"] >= 1 - 0.1 + 0.2 - 1e-3
    assert r["vU_lower"] - r["ve"] >= 0.1 - 1e-3
