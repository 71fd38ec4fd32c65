"""Command-line experiment runner.

Every subcommand builds a :class:`~numrad.report.Report`, writes it as one
JSON line, and exits 0 when all of its contract checks pass, 2 when a check
fails and 1 on any input or runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import acceptance
from .errors import NumradError, SpaceParseError
from .extremal import (
    acpp_check,
    attaining_perturbation,
    build_counterexample_S,
    farthest_distance_check,
    verify_counterexample,
)
from .mideal_lab import (
    asymptotic_modulus,
    compact_family,
    modulus_index_bound,
    msummand_refutation,
    property_m_probe,
    three_ball_certificate,
)
from .operators import (
    MatrixOperator,
    TailOperator,
    constant,
    geometric,
    harmonic,
    parse_operator,
    truncate,
)
from .radius import (
    essential_radius_report,
    numerical_index,
    numerical_radius,
    operator_norm,
    tail_radius_value,
)
from .report import Check, Report, schema_text
from .spaces import ScalarField, exponent, format_exponent, norm, parse_space

SUBCOMMANDS = ("radius", "norm", "index", "essential", "three-ball", "msummand", "m-probe",
               "moduli", "farthest", "acpp", "perturb", "counterexample", "suite")

# key -> converter; the same keys are accepted in a config file
KEYS = {
    "space": str, "field": str, "op": str, "builder": str, "seed": int, "schedule": str,
    "epsilon": float, "out": str, "method": str, "p": str, "q": str, "s": str, "outer": str,
    "preset": str, "t": str, "which": str, "index_value": float, "x": str, "y": str,
    "dual": lambda v: str(v).lower() in ("1", "true", "yes"), "samples": int, "starts": int,
    "truncation": int, "compact": str,
}

DEFAULTS = {"seed": 0, "epsilon": 0.01, "p": "2"}
SCHEDULE = "32,64,128,256"
THREE_BALL_SCHEDULE = "1,2,4,8,16,32,64,128"


class ConfigError(ValueError):
    pass


def _version() -> str:
    try:
        return "numrad " + metadata.version("numrad")
    except metadata.PackageNotFoundError:
        return "numrad"


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}:1: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}:1: unknown key {key!r}")
        try:
            out[key] = KEYS[key](value)
        except ValueError as exc:
            eq = raw.index("=")
            after = raw[eq + 1:]
            col = eq + 2 + len(after) - len(after.lstrip())
            raise ConfigError(f"{path}:{lineno}:{col}: bad value for {key}: {exc}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--space", help='space text, e.g. "lp(3,2)" or "sum(inf; lp(2,2), lp(1,2))"')
    common.add_argument("--field", choices=["real", "complex"])
    common.add_argument("--op", help="operator literal (JSON matrix or tail-operator object), or @file")
    common.add_argument("--builder", help="identity, zero, shift, rotation, random, antisymmetric, "
                                          "harmonic:c, constant:c, geometric:c:q")
    common.add_argument("--seed", type=int)
    common.add_argument("--schedule", help="comma-separated truncation sizes")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--out", help="append the report line to this file instead of stdout")
    common.add_argument("--json-schema", action="store_true", help="print the report schema and exit")
    common.add_argument("--method")
    common.add_argument("--p", help="exponent of the tail-operator model or counterexample")
    common.add_argument("--q")
    common.add_argument("--s")
    common.add_argument("--outer")
    common.add_argument("--preset")
    common.add_argument("--t", help="comma-separated tail sizes for moduli")
    common.add_argument("--which", help="sum_inf or sum_1 for the modulus index bound")
    common.add_argument("--index-value", type=float)
    common.add_argument("--x")
    common.add_argument("--y")
    common.add_argument("--dual", action="store_const", const=True)
    common.add_argument("--samples", type=int)
    common.add_argument("--starts", type=int)
    common.add_argument("--truncation", type=int)
    common.add_argument("--compact", help="JSON list of compact tail operators, or finite/geometric")

    parser = argparse.ArgumentParser(prog="numrad", parents=[common],
                                     description="Numerical radius experiments on sequence spaces.")
    sub = parser.add_subparsers(dest="subcommand")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


# ---------------------------------------------------------------------------
# inputs

def _ints(text) -> list[int]:
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None
    if not vals:
        raise ConfigError("empty list")
    return vals


def _floats(text) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _field(cfg, default: str = "real") -> ScalarField:
    return ScalarField(cfg.get("field", default))


def _space(cfg):
    if "space" not in cfg:
        raise ConfigError("--space is required")
    return parse_space(cfg["space"], _field(cfg))


def _json(text: str, what: str):
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _matrix_builder(name: str, space, seed: int) -> MatrixOperator:
    n = space.dim
    rng = np.random.default_rng(seed)
    if name == "identity":
        A = np.eye(n)
    elif name == "zero":
        A = np.zeros((n, n))
    elif name == "shift":
        A = np.eye(n, k=1)
    elif name == "rotation":
        A = np.zeros((n, n))
        for k in range(0, n - 1, 2):
            A[k, k + 1], A[k + 1, k] = -1.0, 1.0
    elif name in ("random", "antisymmetric"):
        A = rng.standard_normal((n, n))
        if space.field is ScalarField.COMPLEX:
            A = A + 1j * rng.standard_normal((n, n))
        if name == "antisymmetric":
            A = A - A.T
    else:
        raise ConfigError(f"unknown builder {name!r}")
    return MatrixOperator.on(space, A)


def _tail_builder(name: str, cfg) -> TailOperator:
    kind, *params = name.split(":")
    try:
        nums = [float(v) for v in params]
    except ValueError:
        raise ConfigError(f"bad builder parameters in {name!r}") from None
    p, fld = exponent(cfg["p"]), _field(cfg)
    if kind == "harmonic" and len(nums) <= 1:
        return harmonic(nums[0] if nums else 1.0, p=p, field=fld)
    if kind == "constant" and len(nums) == 1:
        return constant(nums[0], p=p, field=fld)
    if kind == "geometric" and len(nums) == 2:
        return geometric(nums[0], nums[1], p=p, field=fld)
    raise ConfigError(f"unknown builder {name!r}")


def operator(cfg):
    """The operator named by ``op`` (a literal) or ``builder``."""
    if "op" in cfg:
        obj = _json(cfg["op"], "--op")
        space = None if isinstance(obj, dict) else _space(cfg)
        try:
            return parse_operator(obj, space)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"--op: malformed operator literal ({exc})") from None
    if "builder" in cfg:
        name = cfg["builder"]
        if name.split(":")[0] in ("harmonic", "constant", "geometric"):
            return _tail_builder(name, cfg)
        return _matrix_builder(name, _space(cfg), cfg["seed"])
    raise ConfigError("need --op or --builder")


def _tail_operator(cfg) -> TailOperator:
    T = operator(cfg)
    if not isinstance(T, TailOperator):
        raise ConfigError("this subcommand needs a tail operator (tail literal or harmonic/constant/geometric builder)")
    return T


def _matrix_operator(cfg) -> MatrixOperator:
    T = operator(cfg)
    if isinstance(T, TailOperator):
        return truncate(T, cfg.get("truncation", 256))
    return T


def _vector(text: str, what: str) -> np.ndarray:
    obj = _json(text, what)
    return np.array([complex(v["re"], v["im"]) if isinstance(v, dict) else v for v in obj])


# ---------------------------------------------------------------------------
# subcommands: each returns (results, methods, diagnostics, checks)

def _at_most(name, value, bound):
    return Check(name, bool(value <= bound), float(bound - value))


def cmd_radius(cfg):
    T = operator(cfg)
    kw = {"seed": cfg["seed"]}
    if "starts" in cfg:
        kw["starts"] = cfg["starts"]
    M = truncate(T, cfg.get("truncation", 256)) if isinstance(T, TailOperator) else T
    cert = numerical_radius(M, cfg.get("method", "auto"), **kw)
    if isinstance(T, TailOperator):
        results = {"value": tail_radius_value(T, cfg["seed"]), "truncated": cert, "truncation": M.shape[0]}
    else:
        results = cert.to_json()
    gap = cert.value - cert.witness_value(M)
    return results, [cert.method], cert.diagnostics, [_at_most("witness_attains", gap, 1e-9)]


def cmd_norm(cfg):
    T = _matrix_operator(cfg)
    cert = operator_norm(T, cfg.get("method", "auto"), seed=cfg["seed"])
    attained = float(norm(T.codomain, T.entries @ cert.point) / norm(T.domain, cert.point))
    return cert.to_json(), [cert.method], cert.diagnostics, [_at_most("witness_attains", cert.value - attained, 1e-9)]


def cmd_index(cfg):
    est = numerical_index(_space(cfg), seed=cfg["seed"])
    checks = [Check("in_unit_interval", 0 <= est.value <= 1 + 1e-9, float(min(est.value, 1 - est.value)))]
    return est.to_json(), [est.method], est.diagnostics, checks


def cmd_essential(cfg):
    T = _tail_operator(cfg)
    rep = essential_radius_report(T, _ints(cfg.get("schedule", SCHEDULE)), seed=cfg["seed"])
    checks = [_at_most("triple_agreement", rep["max_pairwise_gap"], 1e-3)]
    return rep, ["ClosedForm", "Extrapolated"], {"schedule": _ints(cfg.get("schedule", SCHEDULE))}, checks


def _compact_list(cfg, T: TailOperator) -> list:
    choice = cfg.get("compact", "finite")
    if choice in ("finite", "geometric"):
        return compact_family(T.p, choice, np.random.default_rng(cfg["seed"]))
    objs = _json(choice, "--compact")
    if not isinstance(objs, list):
        raise ConfigError("--compact must be a JSON list of tail operators")
    return [parse_operator(o) for o in objs]


def cmd_three_ball(cfg):
    T = _tail_operator(cfg)
    S = _compact_list(cfg, T)
    cert = three_ball_certificate(S, T, cfg["epsilon"], _ints(cfg.get("schedule", THREE_BALL_SCHEDULE)), seed=cfg["seed"])
    margin = 1 + cfg["epsilon"] - max(cert.achieved)
    return cert.to_json(), ["MultiStart", "ClosedForm"], {"count": len(S)}, [Check("certificate", cert.success, margin)]


def cmd_msummand(cfg):
    T = operator(cfg)
    r = msummand_refutation(T, cfg["epsilon"], seed=cfg["seed"], truncation=cfg.get("truncation", 256))
    results = {"K": r["K"].entries, "witness": r["witness"], "lower": r["lower"], "vK": r["vK"], "ok": r["ok"]}
    checks = [Check("lower_bound", r["lower"] >= 2 - cfg["epsilon"] - 1e-6, r["lower"] - (2 - cfg["epsilon"])),
              _at_most("vK_is_one", abs(r["vK"] - 1), 1e-6)]
    return results, [r["witness"].method], r["witness"].diagnostics, checks


def cmd_m_probe(cfg):
    space = _space(cfg)
    for key in ("x", "y", "index_value"):
        if key not in cfg:
            raise ConfigError(f"--{key.replace('_', '-')} is required")
    r = property_m_probe(space, _vector(cfg["x"], "--x"), _vector(cfg["y"], "--y"), cfg["index_value"],
                         dual=bool(cfg.get("dual", False)))
    return r, ["ClosedForm"], {"direct_gap": max(row["direct_gap"] for row in r["rows"])}, \
        [Check("inequality", r["ok"], r["margin"])]


def _model(text: str):
    return "c0" if text.lower() == "c0" else exponent(text)


def cmd_moduli(cfg):
    s = _model(cfg.get("s", cfg["p"]))
    rows, worst, ordered = [], 0.0, True
    for t in _floats(cfg.get("t", "0,0.5,1,2")):
        closed = asymptotic_modulus(s, t)
        est = asymptotic_modulus(s, t, "TailEstimate", seed=cfg["seed"])
        gap = max(abs(closed.delta_bar - est.delta_bar), abs(closed.rho_bar - est.rho_bar))
        worst, ordered = max(worst, gap), ordered and est.delta_bar <= est.rho_bar + 1e-15
        rows.append({"closed": closed, "estimate": est, "gap": gap})
    results = {"space": "c0" if s == "c0" else format_exponent(s), "rows": rows}
    if "which" in cfg:
        results["index_bound"] = modulus_index_bound(s, cfg["which"], cfg["seed"])
    checks = [_at_most("closed_form_agreement", worst, 1e-6), Check("delta_le_rho", ordered, None)]
    return results, ["ClosedForm", "TailEstimate"], {"max_gap": worst}, checks


def cmd_farthest(cfg):
    T = _matrix_operator(cfg)
    rep = farthest_distance_check(T, cfg["epsilon"], cfg.get("samples", 200), seed=cfg["seed"])
    target = rep.vT + 1
    checks = [Check("constructed_distance", rep.lower >= target - cfg["epsilon"] - 1e-6,
                    rep.lower - (target - cfg["epsilon"])),
              _at_most("sampled_distance", rep.sampled_upper, target + 1e-6)]
    return rep.to_json(), ["MultiStart", "ClosedForm"], {"samples": rep.samples}, checks


def cmd_acpp(cfg):
    T = _tail_operator(cfg)
    r = acpp_check(T, _ints(cfg.get("schedule", SCHEDULE)), seed=cfg["seed"])
    return r, ["Extrapolated", "ClosedForm"], {"non_cauchy": r["non_cauchy"]}, [_at_most("gap", r["gap"], 1e-3)]


def cmd_perturb(cfg):
    T = _tail_operator(cfg)
    eps = cfg["epsilon"]
    r = attaining_perturbation(T, eps, truncation=cfg.get("truncation", 256), seed=cfg["seed"])
    checks = [_at_most("distance", r["distance"], eps), Check("attains", r["vU_lower"] > r["ve"] + eps / 8,
                                                              r["vU_lower"] - r["ve"] - eps / 8)]
    return r, ["MultiStart", "ClosedForm"], {"truncation": cfg.get("truncation", 256)}, checks


def cmd_counterexample(cfg):
    field = _field(cfg, "complex")
    S = build_counterexample_S(s=exponent(cfg.get("s", "2")), p=exponent(cfg["p"]), q=exponent(cfg.get("q", "1")),
                               outer=exponent(cfg.get("outer", "inf")), field=field)
    rep = verify_counterexample(S, _ints(cfg.get("schedule", SCHEDULE)), seed=cfg["seed"], strict=False)
    checks = [
        _at_most("adjoint_norm_closed_form", abs(rep.norm_S - rep.adjoint_norm_formula), 1e-3),
        _at_most("radius_equals_norm", abs(rep.v_S - rep.norm_S), 1e-3),
        _at_most("essential_upper", rep.ve_S_upper, 1 + 1e-6),
        Check("radius_exceeds_one", rep.v_S > 1 + 1e-6, rep.v_S - 1 - 1e-6),
    ]
    return rep.to_json(), ["PowerIteration", "ClosedForm", "Extrapolated"], rep.flags, checks


HANDLERS = {
    "radius": cmd_radius, "norm": cmd_norm, "index": cmd_index, "essential": cmd_essential,
    "three-ball": cmd_three_ball, "msummand": cmd_msummand, "m-probe": cmd_m_probe,
    "moduli": cmd_moduli, "farthest": cmd_farthest, "acpp": cmd_acpp, "perturb": cmd_perturb,
    "counterexample": cmd_counterexample,
}


def _config_echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items()) if k != "out"}


def run(subcommand: str, cfg: dict) -> Report:
    """Run one non-suite subcommand and return its report."""
    t0 = time.perf_counter()
    results, methods, diagnostics, checks = HANDLERS[subcommand](cfg)
    provenance = {"methods": list(methods), "diagnostics": diagnostics, "package": _version(),
                  "runtime_seconds": time.perf_counter() - t0}
    return Report(subcommand, _config_echo(cfg), results, provenance, checks)


def run_suite(cfg: dict, emit) -> int:
    preset = cfg.get("preset", "quick")
    if preset not in acceptance.PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(acceptance.PRESETS)}")
    echo = _config_echo(cfg)

    def progress(c):
        emit(Report("criterion", echo, c.to_json(), {"methods": ["Acceptance"], "package": _version(),
                                                     "runtime_seconds": c.runtime},
                    [Check(f"criterion_{c.id}", c.passed, None)]))

    suite = acceptance.run_suite(preset, cfg["seed"], progress)
    checks = [Check(f"criterion_{c.id}", c.passed, None) for c in suite.criteria]
    emit(Report("suite", echo, suite.to_json(), {"methods": ["Acceptance"], "package": _version(),
                                                 "runtime_seconds": suite.runtime}, checks))
    return 0 if suite.passed else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.json_schema:
        print(schema_text(), end="")
        return 0
    if not args.subcommand:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = resolve(args)
        out = open(cfg["out"], "a") if "out" in cfg else sys.stdout

        def emit(report: Report):
            out.write(report.line() + "\n")
            out.flush()

        try:
            if args.subcommand == "suite":
                return run_suite(cfg, emit)
            report = run(args.subcommand, cfg)
            emit(report)
            if not report.passed:
                for c in report.checks:
                    if not c.passed:
                        print(f"contract violation: {c.name} (margin {c.margin})", file=sys.stderr)
                return 2
            return 0
        finally:
            if out is not sys.stdout:
                out.close()
    except SpaceParseError as exc:
        print(f"error: line 1 column {exc.column}: {exc}", file=sys.stderr)
    except (ConfigError, NumradError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
