"""Operator norm, numerical radius, numerical index and essential radii.

Every numerical-radius value comes with a certificate: a norming pair (x*, x)
and a unimodular phase lam with conj(lam) x*(Tx) = |x*(Tx)|, so the reported
value is always a certified lower bound.  Closed forms, exhaustive
extreme-pair enumeration and the low-dimensional grid scan are exact up to
floating point; multistart ascent is a lower bound with diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import SpaceMismatch, UnsupportedSpace
from .operators import MatrixOperator, TailOperator, adjoint, complement_projection, truncate
from .spaces import (
    INF,
    Lp,
    NormingPair,
    ScalarField,
    SpaceSpec,
    _face_argmax,
    _jmap,
    dual_space,
    extreme_pair_arrays,
    is_smooth,
    lp,
    norm,
    random_vectors,
    residuals,
    sample_norming_pairs,
)

EXACT = "ExactExtremePoint"
MULTISTART = "MultiStart"
GRID = "GridOracle"
CLOSED = "ClosedForm"

DEFAULT_STARTS = 32
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 5000
ARMIJO = 1e-4
AGREE_TOL = 1e-8
ENUMERATION_BUDGET = 200_000


@dataclass
class Diagnostics:
    starts: int = 1
    iterations: int = 0
    spread: float = 0.0
    converged: bool = True
    agreeing: int = 1

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class RadiusCertificate:
    value: float
    point: np.ndarray
    functional: np.ndarray
    phase: complex
    method: str
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    space: SpaceSpec | None = None

    @property
    def witness(self) -> NormingPair:
        return NormingPair(self.space, self.functional, self.point,
                           residuals(self.space, self.functional, self.point))

    def witness_value(self, T: MatrixOperator) -> float:
        return abs(np.dot(self.functional, T.entries @ self.point))

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": {"x": vector_json(self.point), "xstar": vector_json(self.functional)},
            "phase": {"re": float(np.real(self.phase)), "im": float(np.imag(self.phase))},
            "method": self.method,
            "diagnostics": self.diagnostics.to_json(),
        }


def vector_json(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return {"re": v.real.tolist(), "im": v.imag.tolist()}
    return v.tolist()


def _phase(u):
    u = np.asarray(u)
    mod = np.abs(u)
    return np.where(mod > 0, u / np.where(mod > 0, mod, 1.0), 1.0)


def _basis(space: SpaceSpec, k: int) -> np.ndarray:
    e = np.zeros(space.dim, dtype=space.dtype)
    e[k] = 1.0
    return e


# ---------------------------------------------------------------------------
# operator norm

def operator_norm(T: MatrixOperator, method: str = "auto", *, starts: int = DEFAULT_STARTS,
                  seed: int = 0, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> RadiusCertificate:
    """||T||, by closed form for l_1, l_2, l_inf (flattened) and otherwise by a
    monotone nonlinear power iteration from ``starts`` seeded points."""
    A = T.entries
    p, q = T.domain.flat_exponent(), T.codomain.flat_exponent()
    if not np.any(A):
        x = _basis(T.domain, 0)
        return RadiusCertificate(0.0, x, _jmap(T.codomain.shape, np.zeros(T.codomain.dim, A.dtype), False),
                                 1.0, CLOSED, space=T.domain)
    if method == "auto" and p is not None and p == q and (p in (1, 2) or p is INF):
        absA = np.abs(A)
        if p == 1:
            sums = absA.sum(axis=0)
            k = int(np.argmax(sums))
            x = _basis(T.domain, k)
        elif p is INF:
            sums = absA.sum(axis=1)
            k = int(np.argmax(sums))
            row = A[k]
            x = np.where(row != 0, np.conj(_phase(row)), 1.0).astype(np.result_type(A, T.domain.dtype))
        else:
            _, _, vh = np.linalg.svd(A)
            x = np.conj(vh[0])
        y = A @ x
        value = float(sums[k]) if p != 2 else float(norm(T.codomain, y))
        return RadiusCertificate(value, x, _jmap(T.codomain.shape, y, False), 1.0, CLOSED, space=T.domain)
    return _power_norm(T, starts, seed, tol, max_iter)


def _column_starts(T: MatrixOperator, top: int = 4) -> np.ndarray:
    """Basis vectors of the heaviest columns and their pairwise sums."""
    cols = norm(T.codomain, T.entries.T)
    idx = np.argsort(-cols, kind="stable")[:min(top, T.domain.dim)]
    eye = np.eye(T.domain.dim)
    picks = [eye[k] for k in idx]
    picks += [eye[a] + eye[b] for i, a in enumerate(idx) for b in idx[i + 1:]]
    return np.array(picks)


def _power_norm(T, starts, seed, tol, max_iter) -> RadiusCertificate:
    A = T.entries
    rng = np.random.default_rng(seed)
    X = random_vectors(T.domain, starts, rng).astype(np.result_type(A, T.domain.dtype))
    X = np.concatenate([X, _column_starts(T)])
    X = X / norm(T.domain, X)[:, None]
    starts = len(X)
    dual_dom = dual_space(T.domain).shape
    vals = norm(T.codomain, X @ A.T)
    it, converged = 0, False
    history = [vals.max()]
    for it in range(1, max_iter + 1):
        G = _jmap(T.codomain.shape, X @ A.T, strict=False)
        Z = G @ A
        Xn = _jmap(dual_dom, Z, strict=False)
        nv = norm(T.codomain, Xn @ A.T)
        better = nv >= vals
        X = np.where(better[:, None], Xn, X)
        gain = np.where(better, nv - vals, 0.0)
        vals = np.maximum(vals, nv)
        history.append(vals.max())
        scale = tol * max(vals.max(), 1.0)
        # stop once the leading start is stationary and the best value has stalled
        lead = int(np.argmax(vals))
        if gain[lead] <= scale and (len(history) > 20 and history[-1] - history[-21] <= scale
                                    or np.all(gain <= scale)):
            converged = True
            break
    k = int(np.argmax(vals))
    x = X[k]
    y = A @ x
    return RadiusCertificate(
        float(vals[k]), x, _jmap(T.codomain.shape, y, False), 1.0, MULTISTART,
        Diagnostics(starts, it, float(vals.max() - vals.min()), converged,
                    int(np.sum(vals >= vals[k] - AGREE_TOL))),
        space=T.domain)


# ---------------------------------------------------------------------------
# numerical radius

def pair_values(space: SpaceSpec, A: np.ndarray, X: np.ndarray):
    """For each row x of X (nonzero), the best |f(Ax/||x||)| over norming
    functionals f of x.  Returns (values, functionals, phases)."""
    X = np.asarray(X)
    Xu = X / norm(space, X)[..., None]
    Z = Xu @ A.T
    if space.field is ScalarField.REAL and not np.iscomplexobj(A):
        fp = _face_argmax(space.shape, Xu, Z)
        fm = _face_argmax(space.shape, Xu, -Z)
        vp = np.einsum("...i,...i->...", fp, Z)
        vm = -np.einsum("...i,...i->...", fm, Z)
        use_m = vm > vp
        F = np.where(use_m[..., None], fm, fp)
        u = np.einsum("...i,...i->...", F, Z)
        return np.abs(u), F, np.where(u < 0, -1.0, 1.0)
    F = _jmap(space.shape, Xu, strict=False)
    u = np.einsum("...i,...i->...", F, Z)
    for _ in range(2):
        F = _face_argmax(space.shape, Xu, np.conj(_phase(u))[..., None] * Z)
        u = np.einsum("...i,...i->...", F, Z)
    return np.abs(u), F, _phase(u)


def _certificate(space, A, x, method, diagnostics) -> RadiusCertificate:
    v, F, lam = pair_values(space, A, x[None, :])
    x = x / norm(space, x)
    return RadiusCertificate(float(v[0]), x, F[0], complex(lam[0]), method, diagnostics, space)


def numerical_radius(T: MatrixOperator, method: str = "auto", *, starts: int = DEFAULT_STARTS,
                     seed: int = 0, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     decompose: bool = True, phase_grid: int | None = None) -> RadiusCertificate:
    """v(T) = sup |x*(Tx)| over norming pairs.

    method: ``exact`` (closed form or extreme-pair enumeration, polyhedral
    spaces), ``grid`` (real, dimension <= 3), ``multistart`` or ``auto``.
    """
    if not T.is_endo:
        raise SpaceMismatch("the numerical radius needs an endomorphism")
    space, A = T.domain, T.entries
    if not np.any(A):
        pair = sample_norming_pairs(space, 1, seed)[0]
        return RadiusCertificate(0.0, pair.point, pair.functional, 1.0, CLOSED, space=space)
    flat = space.flat_exponent()

    if method in ("auto", "exact") and flat is not None and (flat == 1 or flat is INF):
        return radius_exact_polyhedral(T)
    if method == "exact":
        if not space.is_polyhedral:
            raise UnsupportedSpace(f"exact enumeration needs a polyhedral space, got {space}")
        if space.field is ScalarField.COMPLEX and phase_grid is None:
            raise UnsupportedSpace("complex enumeration needs a phase grid")
        return _radius_enumerate(T, phase_grid)
    if method == "grid":
        return radius_grid(T)
    if method == "auto":
        if flat == 2:
            return _radius_hilbert(T)
        if space.is_polyhedral and space.field is ScalarField.REAL:
            try:
                return _radius_enumerate(T, None, budget=ENUMERATION_BUDGET)
            except UnsupportedSpace:
                pass
    elif method != "multistart":
        raise ValueError(f"unknown method {method!r}")
    return radius_multistart(T, starts=starts, seed=seed, tol=tol, max_iter=max_iter,
                             decompose=decompose)


def radius_exact_polyhedral(T: MatrixOperator) -> RadiusCertificate:
    """v(T) on l_inf^n (max row sum) or l_1^n (max column sum), with the pair."""
    space, A = T.domain, T.entries
    p = INF if space.dim == 1 else space.flat_exponent()
    if not T.is_endo or p is None or not (p == 1 or p is INF):
        raise UnsupportedSpace(f"closed form needs l_1^n or l_inf^n, got {space}")
    absA = np.abs(A)
    dtype = np.result_type(A, space.dtype)
    if p is INF:
        k = int(np.argmax(absA.sum(axis=1)))
        row = A[k]
        x = np.where(row != 0, np.conj(_phase(row)), 1.0).astype(dtype)
        if row[k] == 0:
            x[k] = 1.0
        f = np.zeros(space.dim, dtype=dtype)
        f[k] = np.conj(x[k])
    else:
        k = int(np.argmax(absA.sum(axis=0)))
        col = A[:, k]
        x = _basis(space, k).astype(dtype)
        f = (_phase(col[k]) * np.where(col != 0, np.conj(_phase(col)), 0.0)).astype(dtype)
        f[k] = 1.0
    u = f @ (A @ x)
    # report the sum itself so v and ||T|| agree to the last bit
    value = float(absA.sum(axis=1 if p is INF else 0)[k])
    return RadiusCertificate(value, x, f, complex(_phase(u)), CLOSED, space=space)


def _radius_enumerate(T, phase_grid, budget=None) -> RadiusCertificate:
    space, A = T.domain, T.entries
    fs, xs = extreme_pair_arrays(space, phase_grid)
    if budget is not None and len(xs) > budget:
        raise UnsupportedSpace("too many extreme pairs")
    u = np.einsum("ki,kj,ij->k", fs, xs, A)
    k = int(np.argmax(np.abs(u)))
    return RadiusCertificate(float(abs(u[k])), xs[k], fs[k], complex(_phase(u[k])), EXACT,
                             Diagnostics(starts=len(xs)), space)


def _radius_hilbert(T) -> RadiusCertificate:
    """Euclidean spaces: the field-of-values radius via Hermitian parts."""
    space, A = T.domain, T.entries
    if space.field is ScalarField.REAL and not np.iscomplexobj(A):
        w, V = np.linalg.eigh((A + A.T) / 2)
        k = int(np.argmax(np.abs(w)))
        x = V[:, k]
        return _certificate(space, A, x, CLOSED, Diagnostics())

    def top(theta):
        H = np.exp(1j * theta) * A
        return np.linalg.eigvalsh((H + H.conj().T) / 2)[-1]

    grid = np.linspace(0, 2 * np.pi, 721)[:-1]
    vals = np.array([top(t) for t in grid])
    k = int(np.argmax(vals))
    h = grid[1] - grid[0]
    res = minimize_scalar(lambda t: -top(t), bounds=(grid[k] - h, grid[k] + h), method="bounded",
                          options={"xatol": 1e-14})
    theta = res.x if -res.fun >= vals[k] else grid[k]
    H = np.exp(1j * theta) * A
    _, V = np.linalg.eigh((H + H.conj().T) / 2)
    return _certificate(space, A.astype(complex), V[:, -1], CLOSED, Diagnostics())


# grid oracle ---------------------------------------------------------------

def _directions(n: int, theta_pts: int, phi_pts: int):
    if n == 1:
        return np.array([[1.0], [-1.0]]), None
    if n == 2:
        th = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
        angles = th[:, None]
    else:
        th = (np.arange(theta_pts) + 0.5) * np.pi / theta_pts
        ph = np.arange(phi_pts) * 2 * np.pi / phi_pts
        angles = np.stack(np.meshgrid(th, ph, indexing="ij"), axis=-1).reshape(-1, 2)
    corners = np.array([c for c in np.ndindex(*(3,) * n) if any(v != 1 for v in c)], float) - 1.0
    corners /= np.linalg.norm(corners, axis=1)[:, None]
    if n == 2:
        cang = np.arctan2(corners[:, 1], corners[:, 0])[:, None]
    else:
        cang = np.stack([np.arccos(np.clip(corners[:, 2], -1, 1)),
                         np.arctan2(corners[:, 1], corners[:, 0])], axis=1)
    angles = np.concatenate([angles, cang])
    return _embed(angles), angles


def _embed(angles):
    angles = np.atleast_2d(angles)
    if angles.shape[1] == 1:
        t = angles[:, 0]
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    th, ph = angles[:, 0], angles[:, 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)


def radius_grid(T: MatrixOperator, theta_pts: int = 200, phi_pts: int = 400,
                polish: int = 6) -> RadiusCertificate:
    """Brute-force oracle for real spaces of dimension <= 3: scan a sphere mesh
    (plus every {-1,0,1}^n direction) and polish the best separated points."""
    space, A = T.domain, T.entries
    n = space.dim
    if space.field is not ScalarField.REAL or np.iscomplexobj(A) or n > 3:
        raise UnsupportedSpace("the grid oracle needs a real space of dimension <= 3")
    X, angles = _directions(n, theta_pts, phi_pts)
    vals, _, _ = pair_values(space, A, X)
    best_x, best = X[int(np.argmax(vals))], float(vals.max())
    if angles is not None:
        chosen = []
        for k in np.argsort(-vals, kind="stable"):
            if len(chosen) >= polish:
                break
            if all(abs(X[k] @ X[j]) < 0.999 for j in chosen):
                chosen.append(k)
        f = lambda a: -float(pair_values(space, A, _embed(a))[0][0])
        for k in chosen:
            if n == 2:
                h = 4 * np.pi / 10_000
                r = minimize_scalar(lambda t: f(np.array([t])), method="bounded",
                                    bounds=(angles[k, 0] - h, angles[k, 0] + h), options={"xatol": 1e-14})
                a = np.array([r.x])
            else:
                r = minimize(f, angles[k], method="Nelder-Mead",
                             options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 1500,
                                      "initial_simplex": angles[k] + np.array([[0, 0], [0.02, 0], [0, 0.02]])})
                a = r.x
            if -r.fun > best:
                best, best_x = -r.fun, _embed(a)[0]
    return _certificate(space, A, best_x, GRID, Diagnostics(starts=len(X)))


# multistart ascent ----------------------------------------------------------

def _leaf_exponent(space: SpaceSpec):
    return space.shape.p if isinstance(space.shape, Lp) and is_smooth(space.shape.p) else None


def _components(A: np.ndarray):
    count, labels = connected_components(csr_matrix((np.abs(A) + np.abs(A.T)) > 0), directed=False)
    return count, labels


def radius_multistart(T: MatrixOperator, *, starts: int = DEFAULT_STARTS, seed: int = 0,
                      tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                      decompose: bool = True) -> RadiusCertificate:
    """Projected gradient ascent of |J(x)(Tx)| / ||x|| from seeded starts.

    On a single l_p leaf the matrix splits into connected blocks whose radii
    combine by a max, and for p < 2 the ascent runs on the transpose in l_p*.
    """
    space, A = T.domain, T.entries
    if decompose and space.is_leaf and space.dim > 1:
        count, labels = _components(A)
        if count > 1:
            return _radius_by_blocks(T, count, labels, starts, seed, tol, max_iter)
    p = _leaf_exponent(space)
    rng = np.random.default_rng(seed)
    X0 = random_vectors(space, starts, rng)
    X0 = X0 / norm(space, X0)[:, None]
    if p is not None and p < 2:
        dual = dual_space(space)
        Y0 = _jmap(space.shape, X0, strict=False)
        Y, vals, iters, conv = _ascent(dual, A.T, Y0, tol, max_iter)
        k = _pick(vals)
        y = Y[k] / norm(dual, Y[k])
        x = _jmap(dual.shape, y, strict=False)
        u = y @ (A @ x)
        cert = RadiusCertificate(float(abs(u)), x, y, complex(_phase(u)), MULTISTART, space=space)
    else:
        X, vals, iters, conv = _ascent(space, A, X0, tol, max_iter)
        k = _pick(vals)
        cert = _certificate(space, A, X[k], MULTISTART, None)
    cert.diagnostics = Diagnostics(starts, iters, float(vals.max() - vals.min()),
                                   bool(conv[np.abs(vals - vals[k]) <= AGREE_TOL].all()),
                                   int(np.sum(np.abs(vals - vals[k]) <= AGREE_TOL)))
    return cert


def _pick(vals):
    return int(np.argmax(vals))  # first index among ties


def _radius_by_blocks(T, count, labels, starts, seed, tol, max_iter) -> RadiusCertificate:
    space, A = T.domain, T.entries
    best = None
    for c in range(count):
        idx = np.flatnonzero(labels == c)
        block = A[np.ix_(idx, idx)]
        if len(idx) == 1:
            v = abs(block[0, 0])
            if best is None or v > best[0].value:
                u = block[0, 0]
                cert = RadiusCertificate(float(v), np.ones(1, space.dtype), np.ones(1, space.dtype),
                                         complex(_phase(u)), CLOSED, space=None)
                best = (cert, idx)
            continue
        sub = MatrixOperator.on(lp(len(idx), space.shape.p, space.field), block)
        cert = numerical_radius(sub, "auto", starts=starts, seed=seed, tol=tol, max_iter=max_iter,
                                decompose=False)
        if best is None or cert.value > best[0].value:
            best = (cert, idx)
    cert, idx = best
    x = np.zeros(space.dim, dtype=np.result_type(cert.point, space.dtype))
    f = np.zeros(space.dim, dtype=np.result_type(cert.functional, space.dtype))
    x[idx], f[idx] = cert.point, cert.functional
    return RadiusCertificate(cert.value, x, f, cert.phase, cert.method, cert.diagnostics, space)


def _jmap_derivative(space: SpaceSpec, X, J, N, D):
    """Directional derivative of the normalized duality map at X along D."""
    p = _leaf_exponent(space)
    if p is not None and p >= 2:
        pf = float(p)
        ax = np.abs(X)
        s = np.where(ax > 0, X / np.where(ax > 0, ax, 1.0), 0.0)
        w = ax ** (pf - 2)
        Nn = N[:, None]
        dN = np.real(np.einsum("ki,ki->k", J, D))[:, None]
        core = np.conj(D) * w + (pf - 2) * w * np.conj(s) * np.real(np.conj(s) * D)
        return core / Nn ** (pf - 1) + (1 - pf) * np.conj(X) * w * dN / Nn ** pf
    h = 1e-6 / np.maximum(np.sqrt(np.sum(np.abs(D) ** 2, axis=1)), 1e-300)[:, None]
    return (_jmap(space.shape, X + h * D, False) - _jmap(space.shape, X - h * D, False)) / (2 * h)


def _ascent(space: SpaceSpec, A: np.ndarray, X0: np.ndarray, tol: float, max_iter: int):
    real = space.field is ScalarField.REAL and not np.iscomplexobj(A)
    X = X0.astype(float if real else complex)
    S = len(X)

    def evaluate(X):
        N = norm(space, X)
        J = _jmap(space.shape, X, strict=False)
        u = np.einsum("ki,ki->k", J, X @ A.T)
        return np.abs(u) / N, u, J, N

    def gradient(X, u, J, N):
        lam = _phase(u)
        D = np.conj(lam)[:, None] * (X @ A.T)
        dJ = _jmap_derivative(space, X, J, N, D)
        gu = np.conj(dJ) + np.conj(np.conj(lam)[:, None] * (J @ A))
        phi = np.abs(u)[:, None]
        G = (gu * N[:, None] - phi * np.conj(J)) / N[:, None] ** 2
        return G.real if real else G

    F, u, J, N = evaluate(X)
    G = gradient(X, u, J, N)
    step = np.ones(S)
    done = np.zeros(S, bool)
    conv = np.zeros(S, bool)
    it = 0
    for it in range(1, max_iter + 1):
        gn2 = np.sum(np.abs(G) ** 2, axis=1)
        small = np.sqrt(gn2) <= tol
        conv |= small & ~done
        done |= small
        if done.all():
            break
        t = step.copy()
        accepted = done.copy()
        Xn, Fn = X.copy(), F.copy()
        gn = np.sqrt(gn2)
        for _ in range(60):
            # steps below the last bit of x cannot move it
            live = np.flatnonzero(~accepted & (t * gn > 1e-15))
            if not len(live):
                break
            trial = X[live] + t[live, None] * G[live]
            trial = trial / norm(space, trial)[:, None]
            Ft = evaluate(trial)[0]
            ok = (Ft >= F[live] + ARMIJO * t[live] * gn2[live]) & (Ft > F[live])
            rows = live[ok]
            Xn[rows], Fn[rows] = trial[ok], Ft[ok]
            accepted[rows] = True
            t[live[~ok]] /= 2
        stalled = ~accepted
        # a failed line search means no representable ascent remains
        conv |= stalled & (np.sqrt(gn2) <= 1e-6)
        done |= stalled
        moved = accepted & ~done
        if not moved.any():
            break
        Fm, um, Jm, Nm = evaluate(Xn)
        Gn = gradient(Xn, um, Jm, Nm)
        s = Xn - X
        y = Gn - G
        sy = np.abs(np.real(np.sum(np.conj(s) * y, axis=1)))
        ss = np.real(np.sum(np.conj(s) * s, axis=1))
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2 * t)
        upd = moved
        X[upd], F[upd], G[upd] = Xn[upd], Fm[upd], Gn[upd]
        u[upd], J[upd], N[upd] = um[upd], Jm[upd], Nm[upd]
        step = np.where(upd, np.clip(bb, 1e-8, 1e8), step)
    vals = pair_values(space, A, X)[0]
    return X, vals, it, conv


# ---------------------------------------------------------------------------
# derived quantities

def adjoint_radius_check(T: MatrixOperator, method: str = "auto", seed: int = 0) -> dict:
    a = numerical_radius(T, method, seed=seed)
    b = numerical_radius(adjoint(T), method, seed=seed)
    return {"v": a.value, "v_adj": b.value, "gap": abs(a.value - b.value),
            "methods": [a.method, b.method]}


def tail_radius(T: TailOperator, N: int, seed: int = 0) -> RadiusCertificate:
    """Certified v of the N x N truncation of a tail operator."""
    return numerical_radius(truncate(T, max(N, T.m)), seed=seed)


def tail_radius_value(T: TailOperator, seed: int = 0) -> float:
    """v(T) itself: head block and diagonal tail decouple, so v = max(v(head), sup |d_i|)."""
    head = numerical_radius(truncate(T, T.m), seed=seed).value if T.m else 0.0
    return max(head, T.tail_sup())


@dataclass
class IndexEstimate:
    value: float
    best_operator: MatrixOperator
    method: str
    diagnostics: dict
    upper_bound: bool = True

    def to_json(self) -> dict:
        return {"value": self.value, "upper_bound": self.upper_bound, "method": self.method,
                "best_operator": vector_json(self.best_operator.entries), "diagnostics": self.diagnostics}


def _ratio(space, A, starts, seed, max_iter):
    T = MatrixOperator.on(space, A)
    nrm = operator_norm(T, starts=starts, seed=seed, max_iter=max_iter).value
    if nrm <= 1e-300:
        return np.inf
    return numerical_radius(T, starts=starts, seed=seed, max_iter=max_iter).value / nrm


def numerical_index(space: SpaceSpec, budget: dict | None = None, seed: int = 0) -> IndexEstimate:
    """Upper estimate of n(X) = inf { v(T) : ||T|| = 1 }.

    A seeded candidate pool (random matrices, their antisymmetric parts,
    nilpotent shifts, signed permutations) is screened, then the best few
    candidates are refined by Nelder-Mead on the entries.
    """
    budget = {"candidates": 24, "refine": 3, "evaluations": 200, "starts": 8, "iterations": 500,
              **(budget or {})}
    n = space.dim
    if n > 16:
        raise UnsupportedSpace("numerical_index is capped at total dimension 16")
    rng = np.random.default_rng(seed)
    cplx = space.field is ScalarField.COMPLEX
    pool = []
    for _ in range(budget["candidates"]):
        M = rng.standard_normal((n, n))
        if cplx:
            M = M + 1j * rng.standard_normal((n, n))
        pool += [M, M - M.T, M - M.conj().T]
    pool.append(np.eye(n, k=1) if n > 1 else np.eye(1))
    perm = rng.permutation(n)
    pool.append(np.eye(n)[perm] * rng.choice([-1.0, 1.0], n))
    if n > 1:
        rot = np.eye(n)
        rot[:2, :2] = [[0, -1], [1, 0]]
        pool.append(rot)
    st, its = budget["starts"], budget["iterations"]
    scores = np.array([_ratio(space, M, st, seed, its) for M in pool])
    order = np.argsort(scores, kind="stable")
    best_val, best_M = float(scores[order[0]]), pool[order[0]]
    evals = len(pool)
    for k in order[:budget["refine"]]:
        if best_val <= 1e-12:
            break
        M0 = pool[k]
        pack = (lambda M: np.concatenate([M.real.ravel(), M.imag.ravel()])) if cplx else (lambda M: M.ravel())
        unpack = ((lambda z: (z[:n * n] + 1j * z[n * n:]).reshape(n, n)) if cplx
                  else (lambda z: z.reshape(n, n)))
        res = minimize(lambda z: _ratio(space, unpack(z), st, seed, its), pack(M0), method="Nelder-Mead",
                       options={"maxfev": budget["evaluations"], "xatol": 1e-10, "fatol": 1e-12})
        evals += res.nfev
        if res.fun < best_val:
            best_val, best_M = float(res.fun), unpack(res.x)
    T = MatrixOperator.on(space, best_M)
    nrm = operator_norm(T, starts=DEFAULT_STARTS, seed=seed).value
    T = T * (1.0 / nrm)
    v = numerical_radius(T, seed=seed).value
    return IndexEstimate(float(min(max(v, 0.0), 1.0)), T, MULTISTART,
                         {"pool": len(pool), "evaluations": evals, "screen_min": float(scores.min())})


# ---------------------------------------------------------------------------
# limits along truncation schedules

@dataclass
class Extrapolation:
    schedule: list
    values: list
    estimates: list
    extrapolated: float
    cauchy: bool

    def to_json(self) -> dict:
        return {"schedule": list(self.schedule), "values": list(self.values),
                "estimates": list(self.estimates), "extrapolated": self.extrapolated,
                "non_cauchy": not self.cauchy}


def extrapolate(schedule, values, tol: float = 1e-4) -> Extrapolation:
    """Limit estimate of a sequence sampled at sizes N, fitting a + b/N to
    consecutive pairs and Cauchy-checking the last two estimates."""
    Ns = np.asarray(schedule, float)
    vs = np.asarray(values, float)
    if len(vs) == 1:
        return Extrapolation(list(schedule), vs.tolist(), vs.tolist(), float(vs[0]), False)
    est = (Ns[1:] * vs[1:] - Ns[:-1] * vs[:-1]) / (Ns[1:] - Ns[:-1])
    est = np.maximum(est, 0.0)
    last = est[-2:] if len(est) > 1 else vs[-2:]
    return Extrapolation(list(schedule), vs.tolist(), est.tolist(), float(est[-1]),
                         bool(abs(last[-1] - last[0]) <= tol))


def _check_smooth_p(T: TailOperator):
    if not is_smooth(T.p):
        raise UnsupportedSpace(f"essential radii need 1 < p < inf, got p={T.p}")


def essential_radius_exact(T: TailOperator) -> float:
    """limsup |d_i| of the diagonal tail, known in closed form for each family."""
    _check_smooth_p(T)
    return float(T.declared_limsup)


def essential_radius_via_projections(T: TailOperator, schedule, seed: int = 0) -> Extrapolation:
    """v((I-P_n) T (I-P_n)) on truncations N with n = N/2, extrapolated in N."""
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or max(schedule) > 512:
        raise ValueError("schedule must be increasing with entries <= 512")
    vals = []
    for N in schedule:
        M = truncate(T, max(N, T.m))
        Q = complement_projection(M.domain, N // 2)
        vals.append(numerical_radius(Q @ M @ Q, seed=seed).value)
    return extrapolate(schedule, vals)


def weak_essential_radius(T: TailOperator, levels=range(10, 21)) -> Extrapolation:
    """limsup |J(e_i)(T e_i)| along the weakly null basis net, sampled at
    i = 2^k (m + 1) and extrapolated in i."""
    _check_smooth_p(T)
    idx = [(1 << k) * (T.m + 1) for k in levels]
    vals = [float(abs(T.diag(np.array([i]))[0])) for i in idx]
    return extrapolate(idx, vals)


def essential_radius_report(T: TailOperator, schedule, seed: int = 0) -> dict:
    exact = essential_radius_exact(T)
    proj = essential_radius_via_projections(T, schedule, seed)
    weak = weak_essential_radius(T)
    trio = [exact, proj.extrapolated, weak.extrapolated]
    return {"exact": exact, "projections": proj.to_json(), "weak": weak.to_json(),
            "max_pairwise_gap": float(max(trio) - min(trio))}


__all__ = [
    "CLOSED", "EXACT", "GRID", "MULTISTART", "Diagnostics", "Extrapolation", "IndexEstimate",
    "RadiusCertificate", "adjoint_radius_check", "essential_radius_exact", "essential_radius_report",
    "essential_radius_via_projections", "extrapolate", "numerical_index", "numerical_radius",
    "operator_norm", "pair_values", "radius_exact_polyhedral", "radius_grid", "radius_multistart",
    "tail_radius", "tail_radius_value", "weak_essential_radius",
]
