"""Finite-dimensional sequence spaces: nested l_p blocks and outer direct sums.

Vectors are plain numpy arrays whose last axis runs over the coordinates of a
:class:`SpaceSpec`; leading axes are treated as a batch wherever that is cheap.
Functionals on a space are stored as coefficient vectors under the bilinear
pairing ``f(x) = sum_j f_j x_j`` (no conjugation).  Conjugation only appears
inside the duality maps, which is what makes the adjoint a plain transpose.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .errors import AmbiguousFace, SpaceMismatch, SpaceParseError, UnsupportedSpace

# relative tolerance used to decide that two moduli tie (nonsmooth faces)
TIE_TOL = 1e-12
PAIR_TOL = 1e-9


class _Infinity:
    """The exponent infinity.  A singleton, never a float."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return float("inf")

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Exponent = Union[Fraction, _Infinity]


def exponent(value) -> Exponent:
    """Coerce ``value`` (int, float, str, Fraction or INF) to an exponent >= 1."""
    if value is INF:
        return INF
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return INF
        try:
            p = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad exponent {value!r}") from None
    elif isinstance(value, float):
        if np.isinf(value):
            return INF
        p = Fraction(value).limit_denominator(10**6)
    else:
        p = Fraction(value)
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {value!r}")
    return p


def conjugate(p: Exponent) -> Exponent:
    """Hoelder conjugate, 1/p + 1/p* = 1, with 1 <-> inf by table."""
    p = exponent(p)
    if p is INF:
        return Fraction(1)
    if p == 1:
        return INF
    return p / (p - 1)


def format_exponent(p: Exponent) -> str:
    if p is INF:
        return "inf"
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def is_smooth(p: Exponent) -> bool:
    return p is not INF and p > 1


def as_float(p: Exponent) -> float:
    return float("inf") if p is INF else float(p)


class ScalarField(str, Enum):
    REAL = "real"
    COMPLEX = "complex"

    def unimodular_grid(self, m: int | None = None) -> np.ndarray:
        """The unimodular scalars: {+1, -1} for real, m-th roots of unity for complex."""
        if self is ScalarField.REAL:
            return np.array([1.0, -1.0])
        if not m or m < 2:
            raise UnsupportedSpace("complex field needs a phase grid size >= 2")
        return np.exp(2j * np.pi * np.arange(m) / m)

    @property
    def dtype(self):
        return np.float64 if self is ScalarField.REAL else np.complex128


@dataclass(frozen=True)
class Lp:
    dim: int
    p: Exponent

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", exponent(self.p))


@dataclass(frozen=True)
class DirectSum:
    r: Exponent
    summands: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", exponent(self.r))
        summands = tuple(s.shape if isinstance(s, SpaceSpec) else s for s in self.summands)
        if not summands:
            raise ValueError("a direct sum needs at least one summand")
        for s in summands:
            if not isinstance(s, (Lp, DirectSum)):
                raise TypeError(f"summand must be Lp or DirectSum, got {type(s).__name__}")
        object.__setattr__(self, "summands", summands)

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.summands)

    def offsets(self) -> list[int]:
        out, k = [], 0
        for s in self.summands:
            out.append(k)
            k += s.dim
        return out


Shape = Union[Lp, DirectSum]


@dataclass(frozen=True)
class SpaceSpec:
    shape: Shape
    field: ScalarField = ScalarField.REAL

    def __post_init__(self):
        object.__setattr__(self, "field", ScalarField(self.field))

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def dtype(self):
        return self.field.dtype

    def dual(self) -> "SpaceSpec":
        return dual_space(self)

    def __str__(self):
        return format_shape(self.shape)

    # structural predicates used for method routing

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.shape, Lp)

    @property
    def is_polyhedral(self) -> bool:
        return _polyhedral(self.shape)

    def flat_exponent(self) -> Exponent | None:
        """If every leaf and sum carries one exponent p, the space is l_p^dim; return p."""
        exps = set()
        _collect_exponents(self.shape, exps)
        if not exps:
            return Fraction(2)  # one-dimensional: every exponent gives |x|
        return exps.pop() if len(exps) == 1 else None


def lp(dim: int, p, field=ScalarField.REAL) -> SpaceSpec:
    return SpaceSpec(Lp(dim, p), field)


def dsum(r, *specs: SpaceSpec) -> SpaceSpec:
    fields = {s.field for s in specs}
    if len(fields) != 1:
        raise SpaceMismatch("summands must share a scalar field")
    return SpaceSpec(DirectSum(r, tuple(s.shape for s in specs)), fields.pop())


def leaf_space(spec: SpaceSpec, p=None) -> SpaceSpec:
    """l_p^dim with the dimension and field of ``spec`` (p defaults to its flat exponent)."""
    p = spec.flat_exponent() if p is None else p
    return lp(spec.dim, p, spec.field)


def _polyhedral(shape: Shape) -> bool:
    if isinstance(shape, Lp):
        return shape.dim == 1 or shape.p is INF or shape.p == 1
    if len(shape.summands) > 1 and is_smooth(shape.r):
        return False
    return all(_polyhedral(s) for s in shape.summands)


def _collect_exponents(shape: Shape, acc: set):
    if isinstance(shape, Lp):
        if shape.dim > 1:
            acc.add(shape.p)
        return
    if len(shape.summands) > 1:
        acc.add(shape.r)
    for s in shape.summands:
        _collect_exponents(s, acc)


# ---------------------------------------------------------------------------
# text form

def format_shape(shape: Shape) -> str:
    if isinstance(shape, Lp):
        return f"lp({shape.dim},{format_exponent(shape.p)})"
    inner = ", ".join(format_shape(s) for s in shape.summands)
    return f"sum({format_exponent(shape.r)}; {inner})"


_TOKEN = re.compile(r"\s*(?:(lp|sum)|(inf)|(\d+(?:\.\d+)?(?:/\d+)?)|([(),;]))", re.IGNORECASE)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message):
        raise SpaceParseError(message, self.text, self.pos + 1)

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        return m

    def take(self, kind: str | None = None, literal: str | None = None) -> str:
        m = self.peek()
        if m is None:
            # position of the first non-space char
            while self.pos < len(self.text) and self.text[self.pos].isspace():
                self.pos += 1
            self.fail("unexpected input" if self.pos < len(self.text) else "unexpected end")
        groups = dict(zip(("word", "inf", "num", "punct"), m.groups()))
        tok_kind = next(k for k, v in groups.items() if v is not None)
        value = groups[tok_kind]
        if kind and tok_kind != kind or literal and value.lower() != literal:
            self.pos = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
            self.fail(f"expected {literal or kind}")
        self.pos = m.end()
        return value.lower()

    def exponent(self) -> Exponent:
        m = self.peek()
        if m is not None and m.group(2):
            self.pos = m.end()
            return INF
        start = self.pos
        text = self.take("num")
        try:
            return exponent(text)
        except ValueError as exc:
            self.pos = start
            self.fail(str(exc))

    def shape(self) -> Shape:
        word = self.take("word")
        self.take("punct", "(")
        if word == "lp":
            start = self.pos
            dim_text = self.take("num")
            if not dim_text.isdigit() or int(dim_text) < 1:
                self.pos = start
                self.fail("dimension must be a positive integer")
            self.take("punct", ",")
            p = self.exponent()
            self.take("punct", ")")
            return Lp(int(dim_text), p)
        r = self.exponent()
        self.take("punct", ";")
        items = [self.shape()]
        while True:
            m = self.peek()
            if m is not None and m.group(4) == ",":
                self.pos = m.end()
                items.append(self.shape())
                continue
            break
        self.take("punct", ")")
        return DirectSum(r, tuple(items))


def parse_space(text: str, field=ScalarField.REAL) -> SpaceSpec:
    """Parse ``lp(dim,p)`` / ``sum(r; spec, ...)`` text.  Errors carry a 1-based column."""
    parser = _Parser(text)
    shape = parser.shape()
    rest = text[parser.pos:]
    if rest.strip():
        parser.pos += len(rest) - len(rest.lstrip())
        parser.fail("trailing input")
    return SpaceSpec(shape, field)


# ---------------------------------------------------------------------------
# duality

def _dual_shape(shape: Shape) -> Shape:
    if isinstance(shape, Lp):
        return Lp(shape.dim, conjugate(shape.p))
    return DirectSum(conjugate(shape.r), tuple(_dual_shape(s) for s in shape.summands))


def dual_space(s: SpaceSpec) -> SpaceSpec:
    return SpaceSpec(_dual_shape(s.shape), s.field)


def _pnorm(a: np.ndarray, p: Exponent) -> np.ndarray:
    a = np.abs(a)
    if p is INF:
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.einsum("...i,...i->...", a, a))
    pf = float(p)
    scale = a.max(axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * (np.sum((a / safe[..., None]) ** pf, axis=-1) ** (1.0 / pf))


def _split(shape: DirectSum, x: np.ndarray):
    return [x[..., o:o + s.dim] for o, s in zip(shape.offsets(), shape.summands)]


def _shape_norm(shape: Shape, x: np.ndarray) -> np.ndarray:
    if isinstance(shape, Lp):
        return _pnorm(x, shape.p)
    parts = [_shape_norm(s, xi) for s, xi in zip(shape.summands, _split(shape, x))]
    return _pnorm(np.stack(parts, axis=-1), shape.r)


def _check_dim(s: SpaceSpec, x: np.ndarray):
    if np.shape(x)[-1:] != (s.dim,):
        raise SpaceMismatch(f"vector of length {np.shape(x)[-1:]} is not in {s} (dim {s.dim})")


def norm(s: SpaceSpec, x) -> np.ndarray | float:
    """Norm of ``x`` (batched along leading axes)."""
    x = np.asarray(x)
    _check_dim(s, x)
    out = _shape_norm(s.shape, x)
    return float(out) if np.ndim(out) == 0 else out


def dual_norm(s: SpaceSpec, f) -> np.ndarray | float:
    return norm(dual_space(s), f)


def pairing(f, x):
    """Bilinear pairing sum_j f_j x_j."""
    f, x = np.asarray(f), np.asarray(x)
    if f.shape[-1:] != x.shape[-1:]:
        raise SpaceMismatch(f"cannot pair length {f.shape[-1:]} with {x.shape[-1:]}")
    out = np.einsum("...i,...i->...", f, x)
    return out.item() if np.ndim(out) == 0 else out


def _sgn(x: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(x):
        mod = np.abs(x)
        keep = mod > 1e-290  # dividing by subnormal moduli overflows
        return np.where(keep, x / np.where(keep, mod, 1.0), 0.0)
    return np.sign(x)


def _attaining(a: np.ndarray, strict: bool, what: str) -> np.ndarray:
    """Index of the first maximal entry along the last axis; optionally refuse ties."""
    m = a.max(axis=-1, keepdims=True)
    mask = (a >= m * (1.0 - TIE_TOL)) & (m > 0)
    if strict and np.any(mask.sum(axis=-1) > 1):
        raise AmbiguousFace(f"{what}: the attaining set is not a singleton")
    return np.argmax(mask | (m <= 0), axis=-1)


def _jmap(shape: Shape, x: np.ndarray, strict: bool) -> np.ndarray:
    """Unit functional norming ``x`` (zero for x = 0).  Batched along leading axes."""
    if isinstance(shape, Lp):
        p = shape.p
        if p == 1:
            # zero coordinates get the zero coefficient
            return np.conj(_sgn(x))
        if p is INF:
            k = _attaining(np.abs(x), strict, f"l_inf^{shape.dim}")
            f = np.zeros_like(x)
            xk = np.take_along_axis(x, k[..., None], axis=-1)
            np.put_along_axis(f, k[..., None], np.conj(_sgn(xk)), axis=-1)
            return f
        nx = _pnorm(x, p)[..., None]
        u = np.abs(x) / np.where(nx > 0, nx, 1.0)
        return np.conj(_sgn(x)) * u ** (float(p) - 1.0)

    parts = _split(shape, x)
    c = np.stack([_shape_norm(s, xi) for s, xi in zip(shape.summands, parts)], axis=-1)
    r = shape.r
    if r is INF:
        k = _attaining(c, strict, "outer l_inf sum")
        weights = (np.arange(len(parts)) == k[..., None]).astype(float)
    elif r == 1:
        weights = (c > 0).astype(float)
    else:
        cn = _pnorm(c, r)[..., None]
        weights = (c / np.where(cn > 0, cn, 1.0)) ** (float(r) - 1.0)
    out = []
    for i, (s, xi) in enumerate(zip(shape.summands, parts)):
        w = weights[..., i]
        fi = _jmap(s, xi, strict=False)
        if strict and np.any(w > 0):
            _jmap(s, xi[w > 0], strict=True)
        out.append(w[..., None] * fi)
    return np.concatenate(out, axis=-1)


def duality_map(s: SpaceSpec, x, tol: float = PAIR_TOL, strict: bool = True) -> np.ndarray:
    """The norming functional J(x) of a unit vector ``x``.

    Raises AmbiguousFace where the functional is not unique on an l_inf block
    (leaf or outer sum) unless ``strict=False``, in which case the first
    attaining coordinate is used.  Zero coordinates of l_1 blocks receive a
    zero coefficient.
    """
    x = np.asarray(x)
    _check_dim(s, x)
    nx = _shape_norm(s.shape, x)
    if strict and np.any(np.abs(nx - 1.0) > tol):
        raise ValueError(f"duality_map expects a unit vector, got norm {nx}")
    return _jmap(s.shape, x, strict)


def normalized_jmap(s: SpaceSpec, x) -> np.ndarray:
    """J(x/||x||) without a unit-norm precondition, ties broken by first index."""
    return _jmap(s.shape, np.asarray(x), strict=False)


def norming_vector(s: SpaceSpec, f) -> np.ndarray:
    """A unit vector x in ``s`` with Re f(x) = ||f||_*: the duality map of the dual."""
    return _jmap(_dual_shape(s.shape), np.asarray(f), strict=False)


def _face_argmax(shape: Shape, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    if isinstance(shape, Lp):
        p = shape.p
        if p == 1:
            ax = np.abs(x)
            zero = ax <= TIE_TOL * ax.max(axis=-1, keepdims=True)
            return np.where(zero, np.conj(_sgn(z)), np.conj(_sgn(x)))
        if p is INF:
            ax = np.abs(x)
            m = ax.max(axis=-1, keepdims=True)
            mask = ax >= m * (1.0 - TIE_TOL)
            score = np.where(mask, np.real(np.conj(_sgn(x)) * z), -np.inf)
            k = np.argmax(score, axis=-1)
            f = np.zeros(np.broadcast_shapes(x.shape, z.shape), dtype=np.result_type(x, z))
            xk = np.take_along_axis(x, k[..., None], axis=-1)
            np.put_along_axis(f, k[..., None], np.conj(_sgn(xk)), axis=-1)
            return f
        return _jmap(shape, x, strict=False)

    xs, zs = _split(shape, x), _split(shape, z)
    c = np.stack([_shape_norm(s, xi) for s, xi in zip(shape.summands, xs)], axis=-1)
    zero = c <= TIE_TOL * c.max(axis=-1, keepdims=True)
    r = shape.r
    blocks = []
    for i, (s, xi, zi) in enumerate(zip(shape.summands, xs, zs)):
        fi = _face_argmax(s, xi, zi)
        if r == 1:
            # a zero block may carry any functional of dual norm <= 1
            fi = np.where(zero[..., i:i + 1], _jmap(s, zi, strict=False), fi)
        blocks.append(fi)
    if r is INF:
        vals = np.stack([np.real(np.einsum("...i,...i->...", f, zi)) for f, zi in zip(blocks, zs)], axis=-1)
        vals = np.where(zero | (c < c.max(axis=-1, keepdims=True) * (1.0 - TIE_TOL)), -np.inf, vals)
        k = np.argmax(vals, axis=-1)
        return np.concatenate([np.where((k == i)[..., None], f, 0.0) for i, f in enumerate(blocks)], axis=-1)
    if r == 1:
        return np.concatenate(blocks, axis=-1)
    cn = _pnorm(c, r)[..., None]
    w = (c / np.where(cn > 0, cn, 1.0)) ** (float(r) - 1.0)
    return np.concatenate([w[..., i:i + 1] * f for i, f in enumerate(blocks)], axis=-1)


def face_argmax(s: SpaceSpec, x, z) -> np.ndarray:
    """Norming functional f of x/||x|| maximizing Re f(z) over the whole norming face."""
    x, z = np.asarray(x), np.asarray(z)
    _check_dim(s, x)
    return _face_argmax(s.shape, x, z)


# ---------------------------------------------------------------------------
# norming pairs

@dataclass(frozen=True, eq=False)
class NormingPair:
    """(x*, x) in Pi(X): ||x|| = ||x*|| = 1 and x*(x) = 1, up to the residuals."""

    space: SpaceSpec
    functional: np.ndarray
    point: np.ndarray
    residuals: tuple = field(default=(0.0, 0.0, 0.0))

    @classmethod
    def build(cls, space: SpaceSpec, functional, point, tol: float = PAIR_TOL) -> "NormingPair":
        """Renormalize both vectors and check the three feasibility residuals."""
        x = np.array(point, dtype=np.result_type(point, space.dtype))
        f = np.array(functional, dtype=np.result_type(functional, space.dtype))
        _check_dim(space, x)
        _check_dim(space, f)
        x = x / norm(space, x)
        f = f / dual_norm(space, f)
        res = residuals(space, f, x)
        if max(res) > tol:
            raise ValueError(f"not a norming pair: residuals {res}")
        return cls(space, f, x, res)


def residuals(space: SpaceSpec, f, x) -> tuple:
    return (
        abs(norm(space, x) - 1.0),
        abs(dual_norm(space, f) - 1.0),
        abs(pairing(f, x) - 1.0),
    )


def random_vectors(space: SpaceSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Isotropic Gaussian draws (complex: independent real and imaginary parts)."""
    g = rng.standard_normal((count, space.dim))
    if space.field is ScalarField.COMPLEX:
        g = (g + 1j * rng.standard_normal((count, space.dim))) / np.sqrt(2.0)
    return g


def sample_norming_pairs(space: SpaceSpec, count: int, seed: int) -> list[NormingPair]:
    rng = np.random.default_rng(seed)
    xs = random_vectors(space, count, rng)
    xs = xs / norm(space, xs)[:, None]
    fs = normalized_jmap(space, xs)
    return [NormingPair.build(space, f, x) for f, x in zip(fs, xs)]


def _ext(shape: Shape, phases: np.ndarray) -> np.ndarray:
    if isinstance(shape, Lp):
        if shape.dim == 1:
            return phases[:, None].copy()
        if shape.p is INF:
            return np.array(list(itertools.product(phases, repeat=shape.dim)))
        if shape.p == 1:
            eye = np.eye(shape.dim)
            return np.array([ph * eye[k] for k in range(shape.dim) for ph in phases])
        raise UnsupportedSpace(f"l_{format_exponent(shape.p)} ball is not polyhedral")
    if len(shape.summands) == 1:
        return _ext(shape.summands[0], phases)
    children = [_ext(s, phases) for s in shape.summands]
    if shape.r is INF:
        total = int(np.prod([len(c) for c in children]))
        if total > 2**22:
            raise UnsupportedSpace(f"{total} extreme points is beyond the enumeration cap")
        idx = itertools.product(*[range(len(c)) for c in children])
        return np.array([np.concatenate([c[i] for c, i in zip(children, ix)]) for ix in idx])
    if shape.r == 1:
        rows = []
        offs = np.cumsum([0] + [s.dim for s in shape.summands])
        for c, o in zip(children, offs):
            block = np.zeros((len(c), shape.dim), dtype=c.dtype)
            block[:, o:o + c.shape[1]] = c
            rows.append(block)
        return np.concatenate(rows)
    raise UnsupportedSpace(f"outer l_{format_exponent(shape.r)} sum is not polyhedral")


def extreme_points(space: SpaceSpec, phase_grid: int | None = None) -> np.ndarray:
    """Extreme points of the unit ball of a polyhedral space (complex: on a phase grid)."""
    phases = space.field.unimodular_grid(phase_grid)
    if not space.is_polyhedral:
        raise UnsupportedSpace(f"{space} is not polyhedral")
    return _ext(space.shape, phases)


class ExtremePairs(NamedTuple):
    pairs: list
    exhaustive: bool
    total: int


def extreme_pair_arrays(space: SpaceSpec, phase_grid: int | None = None):
    """(functionals, points) arrays of all pairs of extreme points with x*(x) = 1."""
    xs = extreme_points(space, phase_grid)
    fs = extreme_points(dual_space(space), phase_grid)
    gram = fs @ xs.T
    i, j = np.nonzero(np.abs(gram - 1.0) <= PAIR_TOL)
    return fs[i], xs[j]


def enumerate_extreme_pairs(space: SpaceSpec, budget: int = 100_000,
                            phase_grid: int | None = None) -> ExtremePairs:
    """All (x*, x) in Pi(X) with both entries extreme, up to ``budget`` pairs.

    ``exhaustive`` is False when the budget truncated the list.
    """
    fs, xs = extreme_pair_arrays(space, phase_grid)
    total = len(xs)
    keep = min(total, budget)
    pairs = [NormingPair(space, fs[k], xs[k], residuals(space, fs[k], xs[k])) for k in range(keep)]
    return ExtremePairs(pairs, keep == total, total)


def holder_split(pair: NormingPair, n: int):
    """Split x*(x) = 1 across the first ``n`` coordinates and the rest.

    Returns ``(lam, A, B)`` with ``lam = x*(P_n x)``,
    ``A = ||(I - P_n)* x*|| ||(I - P_n) x||`` and ``B = ||P_n* x*|| ||P_n x||``.
    Supported: smooth l_p leaves, l_inf leaves, and direct sums whose outer
    exponent is smooth or infinite when ``n`` falls on a summand boundary.
    """
    s = pair.space
    if not 1 <= n < s.dim:
        raise ValueError(f"need 1 <= n < {s.dim}, got {n}")
    shape = s.shape
    if isinstance(shape, Lp):
        if shape.p == 1:
            raise UnsupportedSpace("l_1 is outside the Hoelder splitting classes")
    else:
        if shape.r == 1:
            raise UnsupportedSpace("outer l_1 sums are outside the Hoelder splitting classes")
        if n not in shape.offsets()[1:]:
            raise UnsupportedSpace(f"n={n} is not a summand boundary of {s}")
    f, x = pair.functional, pair.point
    head = np.arange(s.dim) < n
    fh, ft = np.where(head, f, 0), np.where(head, 0, f)
    xh, xt = np.where(head, x, 0), np.where(head, 0, x)
    lam = pairing(f, xh)
    a = dual_norm(s, ft) * norm(s, xt)
    b = dual_norm(s, fh) * norm(s, xh)
    return lam, a, b
