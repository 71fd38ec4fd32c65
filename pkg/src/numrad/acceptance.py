"""The acceptance battery: twelve numbered criteria, each a deterministic
experiment with a pass flag, run under a ``quick`` or ``paper`` preset."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .extremal import (
    acpp_check,
    attaining_perturbation,
    build_counterexample_S,
    counterexample_norm_formula,
    farthest_distance_check,
    verify_counterexample,
)
from .mideal_lab import (
    asymptotic_modulus,
    compact_family,
    modulus_index_bound,
    msummand_refutation,
    three_ball_certificate,
)
from .operators import MatrixOperator, constant, finite, geometric, harmonic
from .radius import (
    adjoint_radius_check,
    essential_radius_report,
    numerical_index,
    numerical_radius,
    operator_norm,
    radius_exact_polyhedral,
    radius_grid,
)
from .report import dumps
from .spaces import INF, ScalarField, holder_split, lp, sample_norming_pairs

PRESETS = {
    "paper": {
        "c1_ops": 50, "c2_ops": 20, "c3_ops": 20, "c4_pairs": 1000, "c5_ps": (1.5, 2, 3),
        "c6_ops": 10, "c7_ps": (1.5, 2, 3), "c8_ops": 10, "c8_samples": 200,
        "c9_ps": (1.5, 2, 3), "c9_cs": (0.5, 1.0, 2.0), "c9_heads": (0, 2, 4),
        "c10_cases": ((2, 1), (3, 1), (3, 2), (4, 2)), "c10_schedule": (32, 64, 128, 256),
        "c11_ps": (1.5, 2, 3, 4), "c12_repeat": tuple(range(1, 12)), "budget": 900.0,
    },
    "quick": {
        "c1_ops": 4, "c2_ops": 4, "c3_ops": 5, "c4_pairs": 100, "c5_ps": (2,),
        "c6_ops": 3, "c7_ps": (2,), "c8_ops": 2, "c8_samples": 20,
        "c9_ps": (2,), "c9_cs": (1.0,), "c9_heads": (0, 2),
        "c10_cases": ((2, 1), (3, 2)), "c10_schedule": (32, 64, 128),
        "c11_ps": (2, 3), "c12_repeat": (4, 11), "budget": 60.0,
    },
}

NAMES = {
    1: "radius oracle equivalence",
    2: "polyhedral identities",
    3: "index witnesses",
    4: "Hoelder splitting",
    5: "three-ball certificates",
    6: "M-summand refutation",
    7: "essential radius triple agreement",
    8: "farthest distance",
    9: "ACPP instances and attaining perturbations",
    10: "counterexample constants",
    11: "moduli bounds",
    12: "determinism and runtime",
}


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict
    runtime: float = 0.0

    def to_json(self) -> dict:
        return {"id": self.id, "name": self.name, "pass": self.passed, "details": self.details}

    def line(self) -> str:
        return f"criterion {self.id:2d} {'PASS' if self.passed else 'FAIL'}  {self.name}  ({self.runtime:.1f}s)"


def _rng(*key) -> np.random.Generator:
    return np.random.default_rng([int(k) for k in key])


def _pkey(p) -> int:
    return int(round(float(p) * 10))


# ---------------------------------------------------------------------------

def criterion_1(cfg, seed):
    worst, cases = 0.0, 0
    for p in (1.5, 2, 3):
        for n in (2, 3):
            for k in range(cfg["c1_ops"]):
                A = _rng(seed, 1, _pkey(p), n, k).standard_normal((n, n))
                T = MatrixOperator.on(lp(n, p), A)
                ms = numerical_radius(T, "multistart", seed=seed)
                gr = radius_grid(T)
                worst = max(worst, abs(ms.value - gr.value))
                cases += 1
    return worst <= 1e-6, {"cases": cases, "max_gap": worst, "tolerance": 1e-6}, 120.0


def criterion_2(cfg, seed):
    worst_grid, worst_enum, norm_mismatch, cases = 0.0, 0.0, 0, 0
    for p in (1, INF):
        for n in (1, 2, 3):
            for k in range(cfg["c2_ops"]):
                A = _rng(seed, 2, 0 if p == 1 else 1, n, k).standard_normal((n, n))
                T = MatrixOperator.on(lp(n, p), A)
                closed = radius_exact_polyhedral(T).value
                worst_grid = max(worst_grid, abs(closed - radius_grid(T).value))
                worst_enum = max(worst_enum, abs(closed - numerical_radius(T, "exact", phase_grid=None).value))
                norm_mismatch += int(closed != operator_norm(T).value)
                cases += 1
    ok = worst_grid <= 1e-9 and norm_mismatch == 0
    return ok, {"cases": cases, "max_gap_grid": worst_grid, "max_gap_exact": worst_enum,
                "norm_mismatches": norm_mismatch}, None


def criterion_3(cfg, seed):
    idx = numerical_index(lp(2, 2), seed=seed)
    shift = MatrixOperator.on(lp(2, 2, ScalarField.COMPLEX), [[0, 1], [0, 0]])
    v_closed = numerical_radius(shift, seed=seed).value
    v_ms = numerical_radius(shift, "multistart", seed=seed).value
    gaps = []
    for k in range(cfg["c3_ops"]):
        A = _rng(seed, 3, k).standard_normal((4, 4))
        gaps.append(adjoint_radius_check(MatrixOperator.on(lp(4, 3), A), seed=seed)["gap"])
    ok = idx.value <= 1e-8 and abs(v_closed - 0.5) <= 1e-6 and abs(v_ms - 0.5) <= 1e-6 and max(gaps) <= 1e-4
    return ok, {"real_l2_index": idx.value, "shift_v": v_closed, "shift_v_multistart": v_ms,
                "adjoint_max_gap": max(gaps), "adjoint_cases": len(gaps)}, None


def criterion_4(cfg, seed):
    worst_a, worst_lam, count = 0.0, 0.0, 0
    for p in (1.5, 2, 3):
        for N in (8, 64):
            for fi, fld in enumerate((ScalarField.REAL, ScalarField.COMPLEX)):
                m = cfg["c4_pairs"] // 2 + (cfg["c4_pairs"] % 2) * (1 - fi)
                rng = _rng(seed, 4, _pkey(p), N, fi)
                for pair in sample_norming_pairs(lp(N, p, fld), m, int(rng.integers(1 << 31))):
                    n = int(rng.integers(1, N))
                    lam, a, _ = holder_split(pair, n)
                    worst_a = max(worst_a, abs(a - (1 - lam)))
                    off = max(abs(np.imag(lam)), max(0.0, -np.real(lam)), max(0.0, np.real(lam) - 1))
                    worst_lam = max(worst_lam, off)
                    count += 1
    return worst_a <= 1e-9 and worst_lam <= 1e-9, {"pairs": count, "max_A_gap": worst_a,
                                                    "max_lambda_offset": worst_lam}, None


def criterion_5(cfg, seed):
    rows, ok = [], True
    for p in cfg["c5_ps"]:
        for tname, T in (("harmonic(1)", harmonic(1.0, p=p)), ("constant(0.8)", constant(0.8, p=p))):
            for kind in (0, 1):
                S = compact_family(p, ("finite", "geometric")[kind], _rng(seed, 5, _pkey(p), kind))
                cert = three_ball_certificate(S, T, 0.05, [1, 2, 4, 8, 16, 32, 64, 128], seed=seed)
                good = cert.success and cert.truncation <= 256
                ok &= good
                rows.append({"p": p, "T": tname, "S": ["finite", "geometric"][kind], "n": cert.n,
                             "achieved": max(cert.achieved), "truncation": cert.truncation,
                             "inner_ok": cert.split.get("inner_ok"), "success": good})
    return ok, {"instances": rows}, 300.0


def criterion_6(cfg, seed):
    rows, ok = [], True
    spaces = [lp(3, 2), lp(3, 3), lp(3, 1.5, ScalarField.COMPLEX), lp(4, 2, ScalarField.COMPLEX), lp(3, INF)]
    for k in range(cfg["c6_ops"]):
        sp = spaces[k % len(spaces)]
        rng = _rng(seed, 6, k)
        A = rng.standard_normal((sp.dim, sp.dim))
        if sp.field is ScalarField.COMPLEX:
            A = A + 1j * rng.standard_normal((sp.dim, sp.dim))
        T = MatrixOperator.on(sp, A)
        T = T * (1.0 / numerical_radius(T, seed=seed).value)
        r = msummand_refutation(T, 0.01, seed=seed)
        ok &= bool(r["ok"])
        rows.append({"space": str(sp), "field": sp.field.value, "lower": r["lower"], "vK": r["vK"]})
    return ok, {"instances": rows, "epsilon": 0.01}, None


def criterion_7(cfg, seed):
    tails = {
        "harmonic(1)": lambda p: harmonic(1.0, p=p),
        "harmonic(-0.5)": lambda p: harmonic(-0.5, p=p),
        "constant(0.8)": lambda p: constant(0.8, p=p),
        "geometric(1,0.5)": lambda p: geometric(1.0, 0.5, p=p),
        "zero": lambda p: finite(np.zeros((0, 0)), p=p),
        "harmonic(1)+geometric(0.3,0.5)": lambda p: harmonic(1.0, p=p) + geometric(0.3, 0.5, p=p),
    }
    rows, worst = [], 0.0
    for p in cfg["c7_ps"]:
        for name, make in tails.items():
            for m in (0, 2):
                T = make(p)
                if m:
                    head = 0.3 * _rng(seed, 7, _pkey(p), m).standard_normal((m, m))
                    T = finite(head, p=p) + T
                rep = essential_radius_report(T, [32, 64, 128, 256], seed=seed)
                worst = max(worst, rep["max_pairwise_gap"])
                rows.append({"p": p, "tail": name, "head": m, "exact": rep["exact"],
                             "projections": rep["projections"]["extrapolated"],
                             "weak": rep["weak"]["extrapolated"]})
    return worst <= 1e-3, {"instances": rows, "max_gap": worst}, None


def criterion_8(cfg, seed):
    rows, ok = [], True
    for p in (2, 3):
        for k in range(cfg["c8_ops"]):
            A = _rng(seed, 8, p, k).standard_normal((4, 4))
            rep = farthest_distance_check(MatrixOperator.on(lp(4, p), A), 0.01, cfg["c8_samples"], seed=seed + k)
            ok &= rep.ok
            rows.append({"p": p, "vT": rep.vT, "lower": rep.lower, "sampled_upper": rep.sampled_upper})
    return ok, {"instances": rows, "samples": cfg["c8_samples"]}, None


def criterion_9(cfg, seed):
    rows, ok = [], True
    for p in cfg["c9_ps"]:
        for c in cfg["c9_cs"]:
            for m in cfg["c9_heads"]:
                head = np.zeros((0, 0))
                if m:
                    H = MatrixOperator.on(lp(m, p), _rng(seed, 9, _pkey(p), _pkey(c), m).standard_normal((m, m)))
                    head = 0.5 * c * H.entries / numerical_radius(H, seed=seed).value
                T = harmonic(c, p=p, head=head)
                acpp = acpp_check(T, seed=seed)
                good = acpp["gap"] <= 1e-3
                pert = [attaining_perturbation(T, eps, seed=seed) for eps in (0.1, 0.4)]
                good &= all(r["ok"] for r in pert)
                ok &= good
                rows.append({"p": p, "c": c, "head": m, "gap": acpp["gap"],
                             "perturb": [{"distance": r["distance"], "vU_lower": r["vU_lower"], "ve": r["ve"]}
                                         for r in pert]})
    zero = attaining_perturbation(finite(np.zeros((0, 0)), p=2), 0.4, seed=seed)
    ok &= zero["ok"]
    rows.append({"zero_operator": {"distance": zero["distance"], "vU_lower": zero["vU_lower"], "ve": zero["ve"]}})
    return ok, {"instances": rows}, None


def criterion_10(cfg, seed):
    rows, ok = [], True
    for p, q in cfg["c10_cases"]:
        for outer, s in ((INF, 2), (1, 3)):
            S = build_counterexample_S(64, s, p, q, outer)
            rep = verify_counterexample(S, cfg["c10_schedule"], seed=seed, strict=False)
            good = rep.ve_S_upper <= 1 + 1e-6 < rep.v_S and abs(rep.v_S - rep.norm_S) <= 1e-3
            good &= abs(rep.norm_S - rep.adjoint_norm_formula) <= 1e-3
            if (p, q) == (2, 1):
                good &= abs(rep.norm_S - np.sqrt(2)) <= 1e-3
            ok &= good
            rows.append({"p": p, "q": q, "s": s, "outer": "inf" if outer is INF else "1",
                         "norm_S": rep.norm_S, "formula": rep.adjoint_norm_formula, "v_S": rep.v_S,
                         "ve_S_upper": rep.ve_S_upper, "pass": good})
    return ok, {"instances": rows, "sqrt2": float(np.sqrt(2)),
                "oracle_3_2": counterexample_norm_formula(3, 2)}, None


def criterion_11(cfg, seed):
    worst, ordered, monotone = 0.0, True, True
    ts = (0.0, 0.25, 0.5, 1.0, 2.0)
    for p in (*cfg["c11_ps"], "c0"):
        prev = -1.0
        for t in ts:
            closed = asymptotic_modulus(p, t)
            est = asymptotic_modulus(p, t, "TailEstimate", seed=seed)
            worst = max(worst, abs(closed.delta_bar - est.delta_bar), abs(closed.rho_bar - est.rho_bar))
            ordered &= est.delta_bar <= est.rho_bar + 1e-15
            monotone &= closed.rho_bar >= prev
            prev = closed.rho_bar
    c0 = modulus_index_bound("c0", "sum_1", seed)["bound"]
    l2 = modulus_index_bound(2, "sum_inf", seed)["bound"]
    ok = worst <= 1e-6 and ordered and monotone and c0 == 0.5 and abs(l2 - 2 ** -0.5) <= 1e-12
    return ok, {"max_modulus_gap": worst, "delta_le_rho": ordered, "monotone": monotone,
                "c0_sum1_bound": c0, "l2_suminf_bound": l2}, None


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
            11: criterion_11}


def run_criterion(i: int, preset: str = "paper", seed: int = 0) -> CriterionResult:
    cfg = PRESETS[preset]
    t0 = time.perf_counter()
    ok, details, limit = CRITERIA[i](cfg, seed)
    runtime = time.perf_counter() - t0
    if limit is not None:
        ok = ok and runtime <= limit
    return CriterionResult(i, NAMES[i], bool(ok), details, runtime)


@dataclass
class SuiteResult:
    preset: str
    criteria: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_json(self) -> dict:
        return {"preset": self.preset, "pass": self.passed, "criteria": [c.to_json() for c in self.criteria]}


def run_suite(preset: str = "paper", seed: int = 0, progress=None) -> SuiteResult:
    """Run criteria 1-11, then criterion 12: repeat the configured subset and
    compare serialized results byte for byte, within the preset's time budget."""
    if preset not in PRESETS:
        raise KeyError(f"unknown preset {preset!r}")
    cfg = PRESETS[preset]
    t0 = time.perf_counter()
    out = SuiteResult(preset)
    for i in range(1, 12):
        res = run_criterion(i, preset, seed)
        out.criteria.append(res)
        if progress:
            progress(res)
    first = {c.id: dumps(c.to_json()) for c in out.criteria}
    t1 = time.perf_counter()
    mismatched = [i for i in cfg["c12_repeat"] if dumps(run_criterion(i, preset, seed).to_json()) != first[i]]
    total = time.perf_counter() - t0
    ok = not mismatched and total <= cfg["budget"]
    c12 = CriterionResult(12, NAMES[12], ok,
                          {"repeated": list(cfg["c12_repeat"]), "mismatched": mismatched,
                           "budget_seconds": cfg["budget"]}, time.perf_counter() - t1)
    out.criteria.append(c12)
    out.runtime = total
    if progress:
        progress(c12)
    return out
