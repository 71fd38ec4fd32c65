"""Finite-scale experiments around compact operators as an M-ideal: three-ball
certificates, bounded shrinking approximation, the M-summand refutation,
basis-tail inequality probes and asymptotic moduli."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClosedFormMismatch, PreconditionError, UnsupportedSpace, WitnessTooWeak
from .operators import (
    MatrixOperator,
    TailOperator,
    complement_projection,
    finite,
    geometric,
    mideal_approximant,
    projection,
    rank_one,
    truncate,
)
from .radius import numerical_radius, operator_norm, tail_radius_value
from .spaces import INF, ScalarField, SpaceSpec, conjugate, exponent, format_exponent, is_smooth, lp, norm

SLACK = 1e-6


def _v(M: MatrixOperator, seed: int) -> float:
    return numerical_radius(M, seed=seed).value


def tail_norm_value(T: TailOperator, seed: int = 0) -> float:
    """||T|| = max(||head||, sup |d_i|) for the block-diagonal tail model."""
    head = operator_norm(truncate(T, T.m), seed=seed).value if T.m else 0.0
    return max(head, T.tail_sup())


def _measure(kind: str):
    if kind in ("v", "radius", "NumericalRadius"):
        return lambda M, seed: numerical_radius(M, seed=seed).value
    if kind in ("norm", "operator", "OperatorNorm"):
        return lambda M, seed: operator_norm(M, seed=seed).value
    raise ValueError(f"unknown norm tag {kind!r}")


def _check_model(T: TailOperator):
    if not (is_smooth(T.p) or T.p is INF):
        raise UnsupportedSpace("needs 1 < p < inf or the l_inf-leaf c0 model")


# ---------------------------------------------------------------------------
# three-ball certificates

@dataclass
class ThreeBallCertificate:
    n: int | None
    epsilon: float
    achieved: list
    truncation: int
    success: bool
    trace: list = field(default_factory=list)
    split: dict = field(default_factory=dict)
    schedule_exhausted: bool = False

    def to_json(self) -> dict:
        return {"n": self.n, "epsilon": self.epsilon, "achieved": self.achieved,
                "truncation": self.truncation, "success": self.success, "trace": self.trace,
                "split": self.split, "schedule_exhausted": self.schedule_exhausted}


def compact_family(p, kind: str, rng: np.random.Generator, count: int = 3, dim: int = 3) -> list:
    """Seeded compact test operators with v <= 1: ``finite`` heads scaled to
    v = 1, or heads at v = 0.7 plus the diagonal 0.5^(i+1), which adds at
    most 0.25."""
    if kind not in ("finite", "geometric"):
        raise ValueError(f"unknown compact family {kind!r}")
    out = []
    for _ in range(count):
        M = MatrixOperator.on(lp(dim, p), rng.standard_normal((dim, dim)))
        head = M.entries / numerical_radius(M).value
        if kind == "finite":
            out.append(finite(head, p=p))
        else:
            out.append(finite(0.7 * head, p=p) + geometric(0.5, 0.5, p=p))
    return out


def three_ball_certificate(S_list, T: TailOperator, epsilon: float, schedule,
                           seed: int = 0) -> ThreeBallCertificate:
    """Search n over ``schedule`` for one K_n with v(T + S_i - K_n) <= 1 + eps
    for every i, at the truncation N = 2 max(schedule)."""
    _check_model(T)
    schedule = sorted(int(n) for n in schedule)
    for S in S_list:
        if not S.compact:
            raise PreconditionError("every S_i must be compact")
        if S.p != T.p:
            raise PreconditionError("S_i and T live on different l_p")
    for op in (T, *S_list):
        if tail_radius_value(op, seed) > 1 + SLACK:
            raise PreconditionError("inputs must satisfy v <= 1")
    N = 2 * schedule[-1]
    trace, hit = [], None
    for n in schedule:
        K = mideal_approximant(T, n)
        achieved = [_v(truncate(T + S - K, N), seed) for S in S_list]
        ok = max(achieved) <= 1 + epsilon + SLACK
        trace.append({"n": n, "achieved": achieved, "ok": ok})
        if ok:
            hit = (n, achieved)
            break
    if hit is None:
        last = trace[-1]
        return ThreeBallCertificate(None, epsilon, last["achieved"], N, False, trace,
                                    schedule_exhausted=True)
    n, achieved = hit
    space = T.space(N)
    P, Q = projection(space, n), complement_projection(space, n)
    Tn = truncate(T, N)
    inner, shrink = [], []
    for S in S_list:
        Sn = truncate(S, N)
        PSP = P @ Sn @ P
        inner.append(_v(Q @ Tn @ Q + PSP, seed))
        shrink.append(_v(PSP - Sn, seed))
    split = {"inner": inner, "inner_ok": max(inner) <= 1 + SLACK,
             "shrink": shrink, "shrink_ok": max(shrink) < epsilon}
    return ThreeBallCertificate(n, epsilon, achieved, N, True, trace, split)


def tfae_condition3_check(T: TailOperator, S_samples, norm_tag: str = "v", schedule=(4, 8, 16, 32, 64),
                          seed: int = 0, tol: float = SLACK) -> dict:
    """Along K_n = P_n T + T P_n - P_n T P_n, compare limsup_n N(S + T - K_n)
    with max{N(S), N(T)} for each compact sample S."""
    _check_model(T)
    measure = _measure(norm_tag)
    schedule = sorted(int(n) for n in schedule)
    N = 2 * schedule[-1]
    whole = tail_radius_value if norm_tag in ("v", "radius", "NumericalRadius") else tail_norm_value
    nT = whole(T, seed)
    samples = []
    for S in S_samples:
        if not S.compact:
            raise PreconditionError("samples must be compact")
        values = [measure(truncate(S + T - mideal_approximant(T, n), N), seed) for n in schedule]
        limsup = max(values[len(values) // 2:])
        bound = max(whole(S, seed), nT)
        samples.append({"values": values, "limsup": limsup, "bound": bound,
                        "margin": bound + tol - limsup})
    return {"norm": norm_tag, "schedule": schedule, "truncation": N, "N_T": nT, "samples": samples,
            "ok": all(s["margin"] >= 0 for s in samples)}


# ---------------------------------------------------------------------------
# M-summand refutation

def msummand_refutation(T, epsilon: float, seed: int = 0, truncation: int = 256) -> dict:
    """For v(T) = 1, the rank-one K = lam x0* (x) x0 built on a near-attaining
    pair has v(K) = 1 while v(T + K) >= 2 - eps."""
    M = truncate(T, max(truncation, T.m)) if isinstance(T, TailOperator) else T
    cert = numerical_radius(M, seed=seed)
    if cert.value < 1 - epsilon:
        raise WitnessTooWeak(f"witness value {cert.value} is below 1 - epsilon = {1 - epsilon}")
    x, f = cert.point, cert.functional
    lam = cert.phase if M.domain.field is ScalarField.COMPLEX else float(np.real(cert.phase))
    K = rank_one(f, x, M.domain) * lam
    lower = float(abs(f @ ((M + K).entries @ x)))
    vK = numerical_radius(K, seed=seed).value
    return {"K": K, "witness": cert, "lower": lower, "vK": vK,
            "ok": lower >= 2 - epsilon - SLACK and abs(vK - 1) <= SLACK}


# ---------------------------------------------------------------------------
# basis-tail probes

PROBE_T = (0.5, 1.0, 2.0)


def _tail_norm(p, a: float, t: float) -> float:
    """||x + t e_beta|| for a vector x of norm a with support disjoint from beta."""
    if p is INF:
        return max(a, t)
    pf = float(p)
    return float((a ** pf + t ** pf) ** (1.0 / pf))


def property_m_probe(space: SpaceSpec, x, y, index_value: float, dual: bool = False,
                     ts=PROBE_T, offset: int = 1000) -> dict:
    """Check index * limsup ||x + x_b|| <= limsup ||y + x_b|| along x_b = t e_b.

    Both limsups are computed in closed form from disjoint supports and
    cross-checked on a padded vector.  ``dual=True`` runs the same probe in
    the dual exponent (functional nets).
    """
    if not space.is_leaf or not is_smooth(space.shape.p):
        raise UnsupportedSpace("property_m_probe needs an l_p leaf with 1 < p < inf")
    p = conjugate(space.shape.p) if dual else space.shape.p
    probe = lp(space.dim, p, space.field)
    x, y = np.asarray(x), np.asarray(y)
    nx, ny = norm(probe, x), norm(probe, y)
    if nx > ny + 1e-12:
        raise PreconditionError("need ||x|| <= ||y||")
    big = lp(space.dim + offset, p, space.field)
    rows, margin = [], np.inf
    for t in ts:
        lx, ly = _tail_norm(p, nx, t), _tail_norm(p, ny, t)
        pad = np.zeros(space.dim + offset, dtype=np.result_type(x, y, float))
        pad[-1] = t
        direct_x = norm(big, np.concatenate([x, pad[space.dim:]]))
        direct_y = norm(big, np.concatenate([y, pad[space.dim:]]))
        m = ly - index_value * lx
        margin = min(margin, m)
        rows.append({"t": t, "limsup_x": lx, "limsup_y": ly, "margin": m,
                     "direct_gap": max(abs(direct_x - lx), abs(direct_y - ly))})
    return {"exponent": format_exponent(p), "dual": dual, "index_value": index_value,
            "rows": rows, "margin": float(margin), "ok": margin >= -1e-9}


# ---------------------------------------------------------------------------
# asymptotic moduli

@dataclass
class ModulusReport:
    t: float
    delta_bar: float
    rho_bar: float
    method: str

    def to_json(self) -> dict:
        return {"t": self.t, "delta_bar": self.delta_bar, "rho_bar": self.rho_bar, "method": self.method}


def _model_exponent(s):
    """Accept an exponent, ``"c0"`` or an l_p leaf spec."""
    if isinstance(s, SpaceSpec):
        if not s.is_leaf:
            raise UnsupportedSpace("moduli are modelled on l_p and c0 only")
        return s.shape.p
    if isinstance(s, str) and s.lower() == "c0":
        return INF
    return exponent(s)


def asymptotic_modulus(s, t: float, method: str = "ClosedForm", seed: int = 0,
                       samples: int = 64, support: int = 8, far: int = 1000) -> ModulusReport:
    """delta_bar(t) and rho_bar(t) along basis tails.

    Closed forms: (1 + t^p)^(1/p) - 1 on l_p and max(1, t) - 1 on the c0 model
    (p = inf).  ``TailEstimate`` measures ||x + t e_m|| - 1 over seeded unit x
    on early coordinates with m far out; inf gives delta_bar, sup rho_bar.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    p = _model_exponent(s)
    if method == "ClosedForm":
        val = _tail_norm(p, 1.0, t) - 1.0
        return ModulusReport(t, val, val, "ClosedForm")
    if method != "TailEstimate":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    space = lp(support + far, p)
    X = np.zeros((samples, support + far))
    X[:, :support] = rng.standard_normal((samples, support))
    X[:, :support] /= norm(lp(support, p), X[:, :support])[:, None]
    X[:, -1] = t
    vals = np.maximum(norm(space, X) - 1.0, 0.0)  # disjoint tails never shrink the norm
    return ModulusReport(t, float(vals.min()), float(vals.max()), "TailEstimate")


def validated_modulus(s, t: float, seed: int = 0, tol: float = 1e-6) -> ModulusReport:
    closed = asymptotic_modulus(s, t, "ClosedForm")
    est = asymptotic_modulus(s, t, "TailEstimate", seed=seed)
    gap = max(abs(closed.delta_bar - est.delta_bar), abs(closed.rho_bar - est.rho_bar))
    if gap > tol:
        raise ClosedFormMismatch(f"closed-form modulus off by {gap} at t={t}")
    return closed


def modulus_index_bound(s, which: str, seed: int = 0) -> dict:
    """Upper bound on the numerical index of an l_inf- or l_1-sum built from
    copies of the model space, from its moduli at t = 1 and those of its dual."""
    p = _model_exponent(s)
    q = conjugate(p)
    mx, md = validated_modulus(p, 1.0, seed), validated_modulus(q, 1.0, seed)
    if which in ("sum_inf", "inf"):
        terms = [1.0 / (1.0 + mx.delta_bar), (1.0 + md.rho_bar) / 2.0]
    elif which in ("sum_1", "1"):
        terms = [(1.0 + mx.rho_bar) / 2.0, 1.0 / (1.0 + md.delta_bar)]
    else:
        raise ValueError(f"unknown sum type {which!r}")
    return {"space": format_exponent(p), "dual": format_exponent(q), "which": which,
            "terms": terms, "bound": min(terms),
            "moduli": {"space": mx.to_json(), "dual": md.to_json()}}


__all__ = [
    "ModulusReport", "ThreeBallCertificate", "asymptotic_modulus", "compact_family", "modulus_index_bound",
    "msummand_refutation", "property_m_probe", "tail_norm_value", "tfae_condition3_check",
    "three_ball_certificate", "validated_modulus",
]
