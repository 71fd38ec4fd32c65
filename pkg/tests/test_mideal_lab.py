import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numrad.errors import ClosedFormMismatch, PreconditionError, UnsupportedSpace, WitnessTooWeak
from numrad.mideal_lab import (
    asymptotic_modulus,
    compact_family,
    modulus_index_bound,
    msummand_refutation,
    property_m_probe,
    tfae_condition3_check,
    three_ball_certificate,
    validated_modulus,
)
from numrad.operators import MatrixOperator, constant, finite, geometric, harmonic, identity
from numrad.radius import numerical_radius
from numrad.spaces import INF, ScalarField, lp

SCHEDULE = [1, 2, 4, 8, 16, 32, 64, 128]


@pytest.mark.parametrize("p", [1.5, 2, 3])
@pytest.mark.parametrize("kind", ["finite", "geometric"])
def test_three_ball_certificate_found(p, kind):
    S = compact_family(p, kind, np.random.default_rng(7))
    cert = three_ball_certificate(S, harmonic(1.0, p=p), 0.05, SCHEDULE)
    assert cert.success and cert.truncation <= 256
    assert max(cert.achieved) <= 1.05 + 1e-6
    assert cert.trace[-1]["n"] == cert.n


def test_three_ball_split_report():
    S = compact_family(2, "finite", np.random.default_rng(1))
    cert = three_ball_certificate(S, constant(0.8, p=2), 0.05, SCHEDULE)
    assert cert.split["inner_ok"]
    assert len(cert.split["shrink"]) == 3


def test_three_ball_preconditions():
    T = harmonic(1.0, p=2)
    with pytest.raises(PreconditionError):
        three_ball_certificate([constant(0.5, p=2)], T, 0.05, SCHEDULE)
    with pytest.raises(PreconditionError):
        three_ball_certificate([finite(np.eye(2), p=3)], T, 0.05, SCHEDULE)
    with pytest.raises(PreconditionError):
        three_ball_certificate([finite(2 * np.eye(2), p=2)], T, 0.05, SCHEDULE)
    with pytest.raises(UnsupportedSpace):
        three_ball_certificate([finite(np.eye(1), p=1)], harmonic(1.0, p=1), 0.05, SCHEDULE)


def test_three_ball_exhausted_schedule():
    S = [finite(np.eye(4) * 0.9, p=2)]
    cert = three_ball_certificate(S, harmonic(1.0, p=2), 0.05, [1, 2])
    assert not cert.success and cert.schedule_exhausted and cert.n is None


@pytest.mark.parametrize("tag", ["v", "norm"])
def test_tfae_condition3(tag):
    S = [finite(np.array([[0.3, 0.2], [0.0, -0.4]]), p=2), geometric(0.5, 0.5, p=2)]
    r = tfae_condition3_check(harmonic(1.0, p=2), S, tag)
    assert r["ok"]
    assert all(s["margin"] >= 0 for s in r["samples"])


@pytest.mark.parametrize("space", [lp(3, 2), lp(3, 3), lp(3, INF), lp(2, 1.5, ScalarField.COMPLEX)])
def test_msummand_identity(space):
    r = msummand_refutation(identity(space), 0.01)
    assert r["lower"] == pytest.approx(2, abs=1e-9)
    assert r["vK"] == pytest.approx(1, abs=1e-6)
    assert r["ok"]


def test_msummand_on_tail_operator():
    r = msummand_refutation(harmonic(1.0, p=2), 0.01)
    assert r["ok"]


def test_msummand_weak_witness():
    with pytest.raises(WitnessTooWeak):
        msummand_refutation(MatrixOperator.on(lp(2, 2), 0.5 * np.eye(2)), 0.01)


@given(st.sampled_from([1.5, 2, 3]), st.integers(0, 2**31 - 1))
def test_msummand_random(p, seed):
    rng = np.random.default_rng(seed)
    T = MatrixOperator.on(lp(3, p), rng.standard_normal((3, 3)))
    T = T * (1 / numerical_radius(T, seed=seed).value)
    assert msummand_refutation(T, 0.01, seed=seed)["ok"]


def test_property_m_probe():
    r = property_m_probe(lp(3, 2), [0.5, 0, 0], [0.0, 1.0, 0], 1.0)
    assert r["ok"] and all(row["direct_gap"] <= 1e-12 for row in r["rows"])
    r = property_m_probe(lp(2, 3), [0.5, 0.5], [1.0, 0], 1.0, dual=True)
    assert r["exponent"] == "3/2" and r["ok"]
    with pytest.raises(PreconditionError):
        property_m_probe(lp(2, 2), [1.0, 0], [0.1, 0], 1.0)
    with pytest.raises(UnsupportedSpace):
        property_m_probe(lp(2, 1), [0.1, 0], [1.0, 0], 1.0)


@given(st.sampled_from([1.5, 2, 3, 4, "c0"]), st.floats(0, 3))
def test_moduli_properties(s, t):
    closed = asymptotic_modulus(s, t)
    est = asymptotic_modulus(s, t, "TailEstimate", seed=1)
    assert 0 <= est.delta_bar <= est.rho_bar + 1e-15
    assert abs(closed.delta_bar - est.delta_bar) <= 1e-6
    assert asymptotic_modulus(s, t + 0.1).rho_bar >= closed.rho_bar


def test_moduli_closed_forms():
    assert asymptotic_modulus(2, 1).rho_bar == pytest.approx(2 ** 0.5 - 1, abs=1e-15)
    assert asymptotic_modulus("c0", 0.5).rho_bar == 0
    assert validated_modulus(3, 2).delta_bar == pytest.approx(9 ** (1 / 3) - 1)
    with pytest.raises(ValueError):
        asymptotic_modulus(2, -1)


def test_modulus_index_bounds():
    assert modulus_index_bound("c0", "sum_1")["bound"] == 0.5
    assert modulus_index_bound(2, "sum_inf")["bound"] == pytest.approx(2 ** -0.5, abs=1e-12)
    with pytest.raises(ValueError):
        modulus_index_bound(2, "sum_2")


def test_validated_modulus_flags_mismatch(monkeypatch):
    import numrad.mideal_lab as lab
    real = lab.asymptotic_modulus

    def skewed(s, t, method="ClosedForm", **kw):
        r = real(s, t, method, **kw)
        if method == "ClosedForm":
            r.rho_bar += 1e-3
        return r

    monkeypatch.setattr(lab, "asymptotic_modulus", skewed)
    with pytest.raises(ClosedFormMismatch):
        lab.validated_modulus(2, 1.0)


def test_tfae_bound_uses_larger_radius():
    S = finite(np.array([[0.3]]), p=2)
    r = tfae_condition3_check(harmonic(1.0, p=2), [S])
    assert r["samples"][0]["bound"] == pytest.approx(1.0)
    assert r["samples"][0]["margin"] >= 0
