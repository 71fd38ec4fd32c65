"""Farthest points from the compact ball, radius-attaining perturbations and a
composite-space operator whose essential numerical radius sits strictly below
its numerical radius."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ClosedFormMismatch, NotAttaining, PreconditionError, WitnessTooWeak
from .operators import MatrixOperator, TailOperator, adjoint, rank_one, truncate
from .radius import (
    MULTISTART,
    extrapolate,
    numerical_index,
    numerical_radius,
    operator_norm,
    tail_radius,
    tail_radius_value,
    essential_radius_exact,
)
from .spaces import (
    INF,
    ScalarField,
    SpaceSpec,
    _jmap,
    conjugate,
    dsum,
    exponent,
    format_exponent,
    is_smooth,
    lp,
    norm,
    norming_vector,
    sample_norming_pairs,
)

SLACK = 1e-6


def _unimodular(space: SpaceSpec, lam: complex):
    return complex(lam) if space.field is ScalarField.COMPLEX else float(np.real(lam))


# ---------------------------------------------------------------------------
# farthest points

@dataclass
class FarthestReport:
    vT: float
    constructed_K: MatrixOperator
    lower: float
    sampled_upper: float
    epsilon: float
    samples: int
    v_T_minus_K: float = 0.0

    @property
    def ok(self) -> bool:
        return (self.lower >= self.vT + 1 - self.epsilon - SLACK
                and self.sampled_upper <= self.vT + 1 + SLACK)

    def to_json(self) -> dict:
        return {"vT": self.vT, "lower": self.lower, "sampled_upper": self.sampled_upper,
                "epsilon": self.epsilon, "samples": self.samples, "v_T_minus_K": self.v_T_minus_K,
                "constructed_K": self.constructed_K.entries.tolist()
                if not np.iscomplexobj(self.constructed_K.entries) else None,
                "ok": self.ok}


def _random_unit_compact(space: SpaceSpec, rng, seed: int) -> MatrixOperator:
    """Seeded operator with v = 1: a rotated rank-one pair or a normalized dense matrix."""
    n = space.dim
    if rng.random() < 0.5:
        pair = sample_norming_pairs(space, 1, int(rng.integers(1 << 30)))[0]
        lam = np.exp(2j * np.pi * rng.random()) if space.field is ScalarField.COMPLEX else rng.choice([-1.0, 1.0])
        return rank_one(pair.functional, pair.point, space) * lam
    M = rng.standard_normal((n, n))
    if space.field is ScalarField.COMPLEX:
        M = M + 1j * rng.standard_normal((n, n))
    K = MatrixOperator.on(space, M)
    return K * (1.0 / numerical_radius(K, seed=seed).value)


def farthest_distance_check(T: MatrixOperator, epsilon: float = 0.01, samples: int = 200,
                            seed: int = 0, sample_starts: int = 8) -> FarthestReport:
    """K = -lam x* (x) x from a v-witness gives v(T - K) >= v(T) + 1 - eps; random
    unit-radius compacts probe the matching upper bound v(T) + 1."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    cert = numerical_radius(T, seed=seed)
    vT = cert.value
    x, f = cert.point, cert.functional
    if abs(f @ (T.entries @ x)) < vT - epsilon:
        raise WitnessTooWeak("radius witness is weaker than v(T) - epsilon")
    K = rank_one(f, x, T.domain) * (-_unimodular(T.domain, cert.phase))
    lower = float(abs(f @ ((T - K).entries @ x)))
    rng = np.random.default_rng(seed)
    upper = 0.0
    for _ in range(samples):
        C = _random_unit_compact(T.domain, rng, seed)
        upper = max(upper, numerical_radius(T - C, starts=sample_starts, seed=seed).value)
    return FarthestReport(vT, K, lower, upper, epsilon, samples,
                          numerical_radius(T - K, seed=seed).value)


def farthest_point_construct(T: MatrixOperator, seed: int = 0, cert=None) -> MatrixOperator:
    """K0 = -lam0 x0* (x) x0 at an attaining pair with conj(lam0) x0*(T x0) = v(T),
    so that v(T - K0) = v(T) + 1."""
    cert = numerical_radius(T, seed=seed) if cert is None else cert
    d = cert.diagnostics
    if cert.method == MULTISTART and not (d.converged and d.agreeing >= 2):
        raise NotAttaining("multistart witness is not a converged, reproduced maximum")
    return rank_one(cert.functional, cert.point, T.domain) * (-_unimodular(T.domain, cert.phase))


# ---------------------------------------------------------------------------
# adjoint compact perturbation and nowhere density

def _require_harmonic(T: TailOperator):
    if not is_smooth(T.p):
        raise PreconditionError("needs 1 < p < inf")
    if len(T.tail) != 1 or T.tail[0].kind != "harmonic" or T.tail[0].c == 0:
        raise PreconditionError("needs a nonzero harmonic tail (sup not attained)")


def acpp_check(T: TailOperator, schedule=(32, 64, 128, 256), seed: int = 0) -> dict:
    """v(T) from truncations, extrapolated, against v_e(T) for a tail whose
    supremum is not attained and dominates the head."""
    _require_harmonic(T)
    c = abs(T.tail[0].c)
    if T.m and numerical_radius(truncate(T, T.m), seed=seed).value >= c:
        raise PreconditionError("the head reaches the tail supremum")
    schedule = [N for N in schedule if N >= T.m]
    values = [tail_radius(T, N, seed).value for N in schedule]
    monotone = all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    ext = extrapolate(schedule, values)
    ve = essential_radius_exact(T)
    return {"v_extrapolated": ext.extrapolated, "ve": ve, "gap": abs(ext.extrapolated - ve),
            "trace": ext.to_json(), "monotone": monotone, "non_cauchy": not ext.cauchy}


def attaining_perturbation(T: TailOperator, epsilon: float, truncation: int = 256, seed: int = 0) -> dict:
    """U = T + lam (eps/2) x* (x) x at a near-attaining truncation pair: within eps of
    T but with v(U) strictly above v_e(U) = v_e(T)."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    N = max(truncation, T.m)
    M = truncate(T, N)
    vT = tail_radius_value(T, seed)
    space = M.domain
    if vT == 0:
        x = np.zeros(N, dtype=space.dtype)
        x[0] = 1.0
        f, lam, u = x.copy(), 1.0, 0.0
    else:
        cert = numerical_radius(M, seed=seed)
        x, f = cert.point, cert.functional
        u = f @ (M.entries @ x)
        if abs(u) <= vT - min(1.0, vT) * epsilon / 4:
            raise WitnessTooWeak("truncation witness is too far below v(T)")
        lam = _unimodular(space, cert.phase)
    bump = rank_one(f, x, space) * (lam * epsilon / 2)
    U = TailOperator(T.p, M.entries + bump.entries, T.tail, T.field)
    distance = float(epsilon / 2 * norm(space.dual(), f) * norm(space, x))
    vU_lower = float(abs(f @ (truncate(U, N).entries @ x)))
    ve = essential_radius_exact(U)
    return {"U": U, "distance": distance, "vU_lower": vU_lower, "ve": ve, "vT": vT,
            "ok": distance < epsilon and vU_lower > ve + epsilon / 8}


# ---------------------------------------------------------------------------
# composite counterexample

@dataclass(frozen=True)
class CounterexampleOperator:
    """S((x, a), (y, b)) = ((0, 0), (D x, a)) on (l_s + K)_p  (+)_outer  (l_s + K)_q,
    where D = diag(1 - 1/i) has norm 1 but does not attain it."""

    s: object
    p: object
    q: object
    outer: object
    field: ScalarField = ScalarField.COMPLEX
    default_truncation: int = 64

    def space(self, N: int) -> SpaceSpec:
        X = dsum(self.p, lp(N, self.s, self.field), lp(1, self.s, self.field))
        Y = dsum(self.q, lp(N, self.s, self.field), lp(1, self.s, self.field))
        return dsum(self.outer, X, Y)

    def _blocks(self, N: int):
        d = 1.0 - 1.0 / np.arange(1, N + 1)
        S = np.zeros((2 * N + 2, 2 * N + 2))
        S[N + 1 + np.arange(N), np.arange(N)] = d
        V = np.zeros_like(S)
        V[2 * N + 1, N] = 1.0
        return S + V, V

    def truncate(self, N: int | None = None) -> MatrixOperator:
        N = self.default_truncation if N is None else N
        return MatrixOperator.on(self.space(N), self._blocks(N)[0])

    def compact_correction(self, N: int | None = None) -> MatrixOperator:
        """V((x, a), (y, b)) = ((0, 0), (0, a))."""
        N = self.default_truncation if N is None else N
        return MatrixOperator.on(self.space(N), self._blocks(N)[1])

    def cross_block(self, N: int) -> MatrixOperator:
        """The nonzero block of S as an operator from the first summand to the second."""
        sp = self.space(N)
        X = SpaceSpec(sp.shape.summands[0], self.field)
        Y = SpaceSpec(sp.shape.summands[1], self.field)
        return MatrixOperator(self._blocks(N)[0][N + 1:, :N + 1], X, Y)

    def tag(self) -> dict:
        return {"s": format_exponent(self.s), "p": format_exponent(self.p), "q": format_exponent(self.q),
                "outer": format_exponent(self.outer), "field": self.field.value}


def build_counterexample_S(T_head_dim: int = 64, s=2, p=2, q=1, outer=INF,
                           field=ScalarField.COMPLEX) -> CounterexampleOperator:
    s, p, q, outer = exponent(s), exponent(p), exponent(q), exponent(outer)
    if p is INF or q is INF or not (1 <= q < p):
        raise PreconditionError("need 1 <= q < p < inf")
    if not is_smooth(s):
        raise PreconditionError("need 1 < s < inf")
    if not (outer is INF or outer == 1):
        raise PreconditionError("outer sum must be l_inf or l_1")
    return CounterexampleOperator(s, p, q, outer, ScalarField(field), int(T_head_dim))


def counterexample_norm_formula(p, q, a: float = 1.0) -> float:
    """sup_{0<=t<=1} ||(a t, (1 - t^q*)^(1/q*))||_p*, the norm of the adjoint
    when the diagonal has norm ``a``.  For q = 1 this is (1 + a^p*)^(1/p*)."""
    ps, qs = conjugate(exponent(p)), conjugate(exponent(q))
    pf = float(ps)
    if qs is INF:
        return float((1.0 + a ** pf) ** (1.0 / pf))
    qf = float(qs)

    def h(t):
        return ((a * t) ** pf + (1.0 - t ** qf) ** (pf / qf)) ** (1.0 / pf)

    grid = np.linspace(0.0, 1.0, 2001)
    vals = h(grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: -h(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    return float(max(vals[k], -res.fun))


def _radius_pair(S: CounterexampleOperator, N: int, seed: int) -> float:
    """Lower bound for v(S_N) from an explicit norming pair built on the cross block."""
    B = S.cross_block(N)
    Bt = adjoint(B)
    cert = operator_norm(Bt, seed=seed)
    phi = cert.point                      # unit functional on the second summand
    psi = Bt.entries @ phi                # S* phi, a functional on the first summand
    X, Y = B.domain, B.codomain
    u = norming_vector(X, psi)
    full = S.truncate(N)
    if S.outer is INF:
        z = np.concatenate([u, norming_vector(Y, phi)])
        zs = np.concatenate([np.zeros(X.dim), phi])
    else:
        Su = B.entries @ u
        z = np.concatenate([u, np.zeros(Y.dim)])
        zs = np.concatenate([_jmap(X.shape, u, False), _jmap(Y.shape, Su, False)])
    sp = full.domain
    z = z / norm(sp, z)
    zs = zs / norm(sp.dual(), zs)
    return float(abs(zs @ (full.entries @ z)))


@dataclass
class CounterexampleReport:
    p: str
    q: str
    s: str
    outer: str
    norm_S: float
    v_S: float
    ve_S_upper: float
    adjoint_norm_formula: float
    attainment_gap_trace: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (abs(self.norm_S - self.adjoint_norm_formula) <= 1e-3
                and abs(self.v_S - self.norm_S) <= 1e-3
                and self.ve_S_upper <= 1 + SLACK < self.v_S)

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "s": self.s, "outer": self.outer, "norm_S": self.norm_S,
                "v_S": self.v_S, "ve_S_upper": self.ve_S_upper,
                "adjoint_norm_formula": self.adjoint_norm_formula,
                "attainment_gap_trace": self.attainment_gap_trace, "traces": self.traces,
                "flags": self.flags, "ok": self.ok}


def verify_counterexample(S: CounterexampleOperator, schedule=(32, 64, 128, 256), seed: int = 0,
                          strict: bool = True) -> CounterexampleReport:
    """Norm of the adjoint against its closed form, v(S) = ||S||, and the
    compact correction V giving v_e(S) <= ||S - V|| = 1 < v(S)."""
    schedule = sorted(schedule)
    norms, radii, corrected, gaps = [], [], [], []
    for N in schedule:
        SN = S.truncate(N)
        nS = operator_norm(adjoint(SN), seed=seed).value
        norms.append(nS)
        radii.append(_radius_pair(S, N, seed))
        corrected.append(operator_norm(SN - S.compact_correction(N), seed=seed).value)
        limit_N = counterexample_norm_formula(S.p, S.q, 1.0 - 1.0 / N)
        gaps.append({"N": N, "norm": nS, "finite_formula": limit_N})
    formula = counterexample_norm_formula(S.p, S.q)
    ext_n, ext_v, ext_c = extrapolate(schedule, norms), extrapolate(schedule, radii), extrapolate(schedule, corrected)
    for g in gaps:
        g["gap_to_limit"] = formula - g["norm"]
    flags = {"non_cauchy": not (ext_n.cauchy and ext_v.cauchy), "real_field": S.field is ScalarField.REAL}
    if S.field is ScalarField.REAL:
        small = dsum(S.p, lp(2, S.s), lp(1, S.s))
        flags["summand_index_estimate"] = numerical_index(small, {"candidates": 6, "refine": 1,
                                                                 "evaluations": 40}, seed).value
    report = CounterexampleReport(
        format_exponent(S.p), format_exponent(S.q), format_exponent(S.s), format_exponent(S.outer),
        ext_n.extrapolated, ext_v.extrapolated, max(max(corrected), ext_c.extrapolated), formula, gaps,
        {"norm": ext_n.to_json(), "radius": ext_v.to_json(), "corrected_norm": ext_c.to_json()}, flags)
    if strict and abs(report.norm_S - formula) > 1e-3:
        raise ClosedFormMismatch(f"||S*|| = {report.norm_S} but the closed form gives {formula}")
    return report


__all__ = [
    "CounterexampleOperator", "CounterexampleReport", "FarthestReport", "acpp_check",
    "attaining_perturbation", "build_counterexample_S", "counterexample_norm_formula",
    "farthest_distance_check", "farthest_point_construct", "verify_counterexample",
]
