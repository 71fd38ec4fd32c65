"""Operators: dense matrices between sequence spaces and the finite-block plus
diagonal-tail model of operators on infinite l_p."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import SpaceMismatch
from .spaces import (
    INF,
    DirectSum,
    Lp,
    ScalarField,
    SpaceSpec,
    dual_space,
    exponent,
    format_exponent,
    lp,
    pairing,
)


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Dense matrix (codomain dim x domain dim) with explicit domain and codomain."""

    entries: np.ndarray
    domain: SpaceSpec
    codomain: SpaceSpec

    def __post_init__(self):
        a = np.asarray(self.entries)
        if not np.iscomplexobj(a):
            a = a.astype(float)
        if a.ndim != 2 or a.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatch(
                f"matrix of shape {a.shape} does not map {self.domain} -> {self.codomain}")
        object.__setattr__(self, "entries", a)

    @classmethod
    def on(cls, space: SpaceSpec, entries) -> "MatrixOperator":
        return cls(np.asarray(entries), space, space)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def is_endo(self) -> bool:
        return self.domain == self.codomain

    def _like(self, other: "MatrixOperator"):
        if other.domain != self.domain or other.codomain != self.codomain:
            raise SpaceMismatch("operators act between different spaces")

    def __add__(self, other):
        self._like(other)
        return MatrixOperator(self.entries + other.entries, self.domain, self.codomain)

    def __sub__(self, other):
        self._like(other)
        return MatrixOperator(self.entries - other.entries, self.domain, self.codomain)

    def __neg__(self):
        return MatrixOperator(-self.entries, self.domain, self.codomain)

    def __mul__(self, c):
        return MatrixOperator(c * self.entries, self.domain, self.codomain)

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixOperator"):
        if other.codomain != self.domain:
            raise SpaceMismatch("composition across mismatched spaces")
        return MatrixOperator(self.entries @ other.entries, other.domain, self.codomain)

    def __repr__(self):
        return f"MatrixOperator({self.domain} -> {self.codomain}, shape={self.shape})"


def identity(space: SpaceSpec) -> MatrixOperator:
    return MatrixOperator.on(space, np.eye(space.dim))


def zero(domain: SpaceSpec, codomain: SpaceSpec | None = None) -> MatrixOperator:
    codomain = domain if codomain is None else codomain
    return MatrixOperator(np.zeros((codomain.dim, domain.dim)), domain, codomain)


def apply(T: MatrixOperator, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1:] != (T.domain.dim,):
        raise SpaceMismatch(f"vector of length {x.shape[-1:]} is not in {T.domain}")
    return x @ T.entries.T


def adjoint(T: MatrixOperator) -> MatrixOperator:
    """Transpose, acting between the dual spaces (bilinear pairing, no conjugation)."""
    return MatrixOperator(T.entries.T.copy(), dual_space(T.codomain), dual_space(T.domain))


def rank_one(f, x, domain: SpaceSpec, codomain: SpaceSpec | None = None) -> MatrixOperator:
    """The operator y -> f(y) x, written f (x) x."""
    codomain = domain if codomain is None else codomain
    f, x = np.asarray(f), np.asarray(x)
    if f.shape != (domain.dim,) or x.shape != (codomain.dim,):
        raise SpaceMismatch("rank_one: functional or vector has the wrong length")
    return MatrixOperator(np.outer(x, f), domain, codomain)


def projection(space: SpaceSpec, n: int) -> MatrixOperator:
    """Coordinate projection P_n onto the first ``n`` coordinates."""
    if not 0 <= n <= space.dim:
        raise ValueError(f"projection index {n} outside [0, {space.dim}]")
    return MatrixOperator.on(space, np.diag((np.arange(space.dim) < n).astype(float)))


def complement_projection(space: SpaceSpec, n: int) -> MatrixOperator:
    return identity(space) - projection(space, n)


# ---------------------------------------------------------------------------
# tail model

_KINDS = ("zero", "constant", "harmonic", "geometric")


@dataclass(frozen=True)
class Tail:
    """Closed-form diagonal family d_i, i >= 1 (global coordinate index).

    constant: c;  harmonic: c (1 - 1/i);  geometric: c q^i;  zero: 0.
    """

    kind: str
    c: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "geometric" and not abs(self.q) < 1:
            raise ValueError("geometric tails need |q| < 1")

    def at(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(i)
        if self.kind == "constant":
            return np.full_like(i, self.c)
        if self.kind == "harmonic":
            return self.c * (1.0 - 1.0 / i)
        return self.c * np.power(self.q, i)

    @property
    def limit(self) -> float:
        return self.c if self.kind in ("constant", "harmonic") else 0.0

    def scaled(self, a: float) -> "Tail":
        return Tail(self.kind, a * self.c, self.q)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "c": self.c}
        if self.kind == "geometric":
            out["q"] = self.q
        return out


def _canonical_terms(terms) -> tuple:
    terms = tuple(t for t in terms if t.kind != "zero" and t.c != 0)
    return terms or (Tail("zero"),)


@dataclass(frozen=True, eq=False)
class TailOperator:
    """Operator on l_p: an m x m head acting on the first m coordinates plus
    the diagonal d_i (i > m) given by a sum of closed-form tail families."""

    p: object
    head: np.ndarray
    tail: tuple = (Tail("zero"),)
    field: ScalarField = ScalarField.REAL
    declared_limsup: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", exponent(self.p))
        object.__setattr__(self, "field", ScalarField(self.field))
        head = np.asarray(self.head)
        head = head.reshape(0, 0) if head.size == 0 else head
        if not np.iscomplexobj(head):
            head = head.astype(float)
        if head.ndim != 2 or head.shape[0] != head.shape[1]:
            raise ValueError(f"head must be square, got shape {head.shape}")
        object.__setattr__(self, "head", head)
        terms = (self.tail,) if isinstance(self.tail, Tail) else tuple(self.tail)
        object.__setattr__(self, "tail", _canonical_terms(terms))
        expected = abs(sum(t.limit for t in self.tail))
        if self.declared_limsup is None:
            object.__setattr__(self, "declared_limsup", expected)
        elif abs(self.declared_limsup - expected) > 1e-12 * max(1.0, expected):
            raise ValueError(
                f"declared limsup {self.declared_limsup} inconsistent with tail (expected {expected})")

    @property
    def m(self) -> int:
        return self.head.shape[0]

    def diag(self, i) -> np.ndarray:
        """Tail diagonal entries at global 1-based indices ``i`` (meaningful for i > m)."""
        i = np.asarray(i, dtype=float)
        return sum((t.at(i) for t in self.tail), np.zeros_like(i))

    @property
    def limsup(self) -> float:
        return self.declared_limsup

    @property
    def compact(self) -> bool:
        """Compact iff the tail tends to zero (the CompactnessTag)."""
        return self.declared_limsup == 0.0

    def tail_sup(self, horizon: int = 1 << 16) -> float:
        """sup_{i > m} |d_i|, from the closed forms plus a scan of early indices."""
        i = np.arange(self.m + 1, self.m + 1 + horizon)
        return float(max(np.abs(self.diag(i)).max(), self.declared_limsup))

    def space(self, N: int) -> SpaceSpec:
        return lp(N, self.p, self.field)

    def truncate(self, N: int) -> MatrixOperator:
        return truncate(self, N)

    def _padded_head(self, m: int) -> np.ndarray:
        out = np.zeros((m, m), dtype=np.result_type(self.head, float))
        out[:self.m, :self.m] = self.head
        idx = np.arange(self.m, m)
        out[idx, idx] = self.diag(idx + 1)
        return out

    def _check(self, other: "TailOperator"):
        if other.p != self.p or other.field != self.field:
            raise SpaceMismatch("tail operators on different spaces")

    def __add__(self, other: "TailOperator") -> "TailOperator":
        self._check(other)
        m = max(self.m, other.m)
        return TailOperator(self.p, self._padded_head(m) + other._padded_head(m),
                            self.tail + other.tail, self.field)

    def __neg__(self):
        return (-1.0) * self

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a):
        return TailOperator(self.p, a * self.head, tuple(t.scaled(a) for t in self.tail), self.field)

    __rmul__ = __mul__

    def with_head(self, m: int) -> "TailOperator":
        """Same operator with the head enlarged to ``m`` (tail entries moved into it)."""
        if m < self.m:
            raise ValueError("cannot shrink the head")
        return TailOperator(self.p, self._padded_head(m), self.tail, self.field)

    def to_json(self) -> dict:
        tail = [t.to_json() for t in self.tail]
        return {
            "p": format_exponent(self.p),
            "head": _matrix_json(self.head),
            "tail": tail[0] if len(tail) == 1 else tail,
            "limsup": self.declared_limsup,
        }

    def __repr__(self):
        terms = "+".join(f"{t.kind}({t.c:g}{', ' + format(t.q, 'g') if t.kind == 'geometric' else ''})"
                         for t in self.tail)
        return f"TailOperator(p={format_exponent(self.p)}, m={self.m}, tail={terms})"


def harmonic(c: float = 1.0, p=2, head=None, field=ScalarField.REAL) -> TailOperator:
    return TailOperator(p, np.zeros((0, 0)) if head is None else head, Tail("harmonic", c), field)


def constant(c: float, p=2, head=None, field=ScalarField.REAL) -> TailOperator:
    return TailOperator(p, np.zeros((0, 0)) if head is None else head, Tail("constant", c), field)


def geometric(c: float, q: float, p=2, head=None, field=ScalarField.REAL) -> TailOperator:
    return TailOperator(p, np.zeros((0, 0)) if head is None else head, Tail("geometric", c, q), field)


def finite(head, p=2, field=ScalarField.REAL) -> TailOperator:
    return TailOperator(p, head, Tail("zero"), field)


def truncate(T: TailOperator, N: int) -> MatrixOperator:
    """N x N section of ``T`` on l_p^N: head block, then d_{m+1}, ..., d_N."""
    if N < T.m:
        raise ValueError(f"truncation {N} is smaller than the head size {T.m}")
    return MatrixOperator.on(T.space(N), T._padded_head(N))


def mideal_approximant(T, n: int):
    """K_n = P_n T + T P_n - P_n T P_n, so that T - K_n = (I - P_n) T (I - P_n).

    For a TailOperator the result is a finite-rank TailOperator (zero tail).
    """
    if isinstance(T, TailOperator):
        m = max(n, T.m)
        block = T._padded_head(m)
        outside = (np.arange(m)[:, None] >= n) & (np.arange(m)[None, :] >= n)
        return TailOperator(T.p, np.where(outside, 0.0, block), Tail("zero"), T.field)
    if not T.is_endo:
        raise SpaceMismatch("mideal_approximant needs an endomorphism")
    P = projection(T.domain, n)
    return P @ T + T @ P - P @ T @ P


def assemble_block(domain: SpaceSpec, codomain: SpaceSpec,
                   blocks: Mapping[tuple, MatrixOperator]) -> MatrixOperator:
    """Block matrix on direct sums; block (i, j) maps summand j of the domain
    into summand i of the codomain.  Missing blocks are zero."""
    if not isinstance(domain.shape, DirectSum) or not isinstance(codomain.shape, DirectSum):
        raise SpaceMismatch("assemble_block needs direct sums on both sides")
    dom, cod = domain.shape, codomain.shape
    out = np.zeros((cod.dim, dom.dim), dtype=np.result_type(float, *[b.entries for b in blocks.values()]))
    for (i, j), B in blocks.items():
        if B.domain.shape != dom.summands[j] or B.codomain.shape != cod.summands[i]:
            raise SpaceMismatch(f"block ({i},{j}) does not match summands ({i},{j})")
        ri, cj = cod.offsets()[i], dom.offsets()[j]
        out[ri:ri + B.shape[0], cj:cj + B.shape[1]] = B.entries
    return MatrixOperator(out, domain, codomain)


def summand(space: SpaceSpec, i: int) -> SpaceSpec:
    return SpaceSpec(space.shape.summands[i], space.field)


# ---------------------------------------------------------------------------
# literals: dense matrices as JSON rows; tail operators as JSON objects

def _number_json(z):
    z = complex(z)
    return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}


def _matrix_json(a: np.ndarray) -> list:
    return [[_number_json(v) for v in row] for row in np.asarray(a)]


def _parse_number(v):
    if isinstance(v, dict):
        return complex(v["re"], v.get("im", 0.0))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    return float(v)


def _parse_matrix(rows) -> np.ndarray:
    vals = [[_parse_number(v) for v in row] for row in rows]
    if any(len(r) != len(vals[0]) for r in vals) if vals else False:
        raise ValueError("ragged matrix literal")
    arr = np.array(vals) if vals else np.zeros((0, 0))
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real
    return arr


def _parse_tail(obj) -> tuple:
    items = obj if isinstance(obj, list) else [obj]
    return tuple(Tail(it["kind"], float(it.get("c", 0.0)), float(it.get("q", 0.0))) for it in items)


def parse_operator(text_or_obj, space: SpaceSpec | None = None, codomain: SpaceSpec | None = None):
    """Parse an operator literal: a JSON matrix (needs ``space``) or a tail-operator object."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if isinstance(obj, dict):
        field_ = ScalarField(obj.get("field", space.field if space else "real"))
        return TailOperator(obj["p"], _parse_matrix(obj.get("head", [])), _parse_tail(obj.get("tail", {"kind": "zero"})),
                            field_, obj.get("limsup"))
    if space is None:
        raise ValueError("a matrix literal needs a space")
    return MatrixOperator(_parse_matrix(obj), space, space if codomain is None else codomain)


def dump_operator(T) -> str:
    if isinstance(T, TailOperator):
        return json.dumps(T.to_json())
    return json.dumps(_matrix_json(T.entries))


def same_kind_pairing_check(T: MatrixOperator, f, x) -> float:
    """|adjoint(T) f (x) - f (T x)|, the defining identity of the adjoint."""
    return abs(pairing(adjoint(T).entries @ f, x) - pairing(f, T.entries @ x))


__all__ = [
    "MatrixOperator", "Tail", "TailOperator", "adjoint", "apply", "assemble_block",
    "complement_projection", "constant", "dump_operator", "finite", "geometric", "harmonic",
    "identity", "mideal_approximant", "parse_operator", "projection", "rank_one", "summand",
    "truncate", "zero", "INF", "Lp", "Fraction",
]
