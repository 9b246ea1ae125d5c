"""Hot numeric loops: weighted system evaluation, Newton, path tracking.

A *weighted system* is a stack of ``K`` polynomial blocks sharing ``m``
equations in ``n`` unknowns,

    H(x, tau) = sum_k w_k(tau) * P_k(x),   w(tau) = w0 + tau * (w1 - w0),

stored as flat term arrays (``exps``, ``coefs``, ``eq``, ``blk``).  Every
homotopy in the package (total degree, the t-family, the delta-family used
for local multiplicities) is one of these with different weights.

Two implementations share the tracking logic: numba-jitted loops, and a
numpy-vectorised evaluator with ``numpy.linalg.solve``.  ``_accel`` picks one.
"""
from __future__ import annotations

import types
from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit
from .polycore import Polynomial

OK, DIVERGED, MIN_STEP, MAX_STEPS = 0, 1, 2, 3
STATUS_NAMES = {OK: "ok", DIVERGED: "diverged", MIN_STEP: "min-step", MAX_STEPS: "max-steps"}


@dataclass(frozen=True)
class WeightedSystem:
    exps: np.ndarray
    coefs: np.ndarray
    eq: np.ndarray
    blk: np.ndarray
    nblocks: int
    neqs: int
    nvars: int
    maxdeg: int

    @classmethod
    def from_blocks(cls, blocks: list[list[Polynomial]], nvars: int) -> "WeightedSystem":
        m = len(blocks[0])
        if any(len(b) != m for b in blocks):
            raise ValueError("all blocks need the same number of equations")
        rows, coefs, eqs, blks = [], [], [], []
        for b, polys in enumerate(blocks):
            for r, p in enumerate(polys):
                if p.nvars != nvars:
                    raise ValueError("polynomial arity does not match the system")
                for e, c in p.terms.items():
                    rows.append(e)
                    coefs.append(complex(c))
                    eqs.append(r)
                    blks.append(b)
        exps = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
        return cls(exps, np.array(coefs, dtype=np.complex128),
                   np.array(eqs, dtype=np.int64), np.array(blks, dtype=np.int64),
                   len(blocks), m, nvars, int(exps.max()) if exps.size else 0)

    def with_block(self, polys_terms: tuple[np.ndarray, np.ndarray, np.ndarray]) -> "WeightedSystem":
        """Append a block given directly as (exps, coefs, eq) arrays."""
        exps, coefs, eq = polys_terms
        return WeightedSystem(
            np.vstack([self.exps, exps]).astype(np.int64),
            np.concatenate([self.coefs, coefs]).astype(np.complex128),
            np.concatenate([self.eq, eq]).astype(np.int64),
            np.concatenate([self.blk, np.full(len(coefs), self.nblocks, dtype=np.int64)]),
            self.nblocks + 1, self.neqs, self.nvars,
            max(self.maxdeg, int(exps.max()) if exps.size else 0))

    @property
    def arrays(self):
        return (self.exps, self.coefs, self.eq, self.blk, self.nblocks, self.neqs, self.maxdeg)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@njit(cache=True)
def _eval_loop(exps, coefs, eq, blk, K, m, maxdeg, x):
    n = x.shape[0]
    T = exps.shape[0]
    pw = np.empty((n, maxdeg + 1), dtype=np.complex128)
    for i in range(n):
        pw[i, 0] = 1.0
        for k in range(1, maxdeg + 1):
            pw[i, k] = pw[i, k - 1] * x[i]
    val = np.zeros((K, m), dtype=np.complex128)
    jac = np.zeros((K, m, n), dtype=np.complex128)
    for t in range(T):
        c = coefs[t]
        b = blk[t]
        r = eq[t]
        mono = c
        for i in range(n):
            mono *= pw[i, exps[t, i]]
        val[b, r] += mono
        for i in range(n):
            a = exps[t, i]
            if a > 0:
                d = c * a * pw[i, a - 1]
                for j in range(n):
                    if j != i:
                        d *= pw[j, exps[t, j]]
                jac[b, r, i] += d
    return val, jac


def _eval_numpy(exps, coefs, eq, blk, K, m, maxdeg, x):
    n = x.shape[0]
    pw = x[None, :] ** exps
    flat = blk * m + eq
    size = K * m
    mono = coefs * pw.prod(axis=1)
    val = (np.bincount(flat, mono.real, size) + 1j * np.bincount(flat, mono.imag, size)).reshape(K, m)
    jac = np.zeros((K, m, n), dtype=np.complex128)
    dpw = np.where(exps > 0, exps * x[None, :] ** np.maximum(exps - 1, 0), 0)
    for i in range(n):
        others = np.prod(np.delete(pw, i, axis=1), axis=1) if n > 1 else np.ones(len(coefs))
        d = coefs * dpw[:, i] * others
        jac[:, :, i] = (np.bincount(flat, d.real, size) + 1j * np.bincount(flat, d.imag, size)).reshape(K, m)
    return val, jac


# ---------------------------------------------------------------------------
# dense complex solve
# ---------------------------------------------------------------------------

@njit(cache=True)
def _solve_loop(A, b):
    n = A.shape[0]
    M = A.copy()
    y = b.copy()
    scale = 0.0
    for i in range(n):
        for j in range(n):
            v = abs(M[i, j])
            if v > scale:
                scale = v
    if scale == 0.0:
        return y, False
    for k in range(n):
        p = k
        best = abs(M[k, k])
        for i in range(k + 1, n):
            v = abs(M[i, k])
            if v > best:
                best = v
                p = i
        if best <= 1e-300 or best < 1e-15 * scale * 1e-3:
            return y, False
        if p != k:
            for j in range(n):
                tmp = M[k, j]
                M[k, j] = M[p, j]
                M[p, j] = tmp
            tmp = y[k]
            y[k] = y[p]
            y[p] = tmp
        for i in range(k + 1, n):
            f = M[i, k] / M[k, k]
            if f != 0:
                for j in range(k, n):
                    M[i, j] -= f * M[k, j]
                y[i] -= f * y[k]
    for k in range(n - 1, -1, -1):
        s = y[k]
        for j in range(k + 1, n):
            s -= M[k, j] * y[j]
        y[k] = s / M[k, k]
    return y, True


def _solve_numpy(A, b):
    try:
        y = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return b.copy(), False
    if not np.all(np.isfinite(y)):
        return b.copy(), False
    return y, True


# ---------------------------------------------------------------------------
# Newton and path tracking.  Written once against the module globals _EVAL,
# _SOLVE, _COMBINE and _NEWTON; the numpy variant is a clone of the same code
# bound to a different globals dict.
# ---------------------------------------------------------------------------

def _combine(exps, coefs, eq, blk, K, m, maxdeg, x, w):
    val, jac = _EVAL(exps, coefs, eq, blk, K, m, maxdeg, x)
    n = x.shape[0]
    H = np.zeros(m, dtype=np.complex128)
    J = np.zeros((m, n), dtype=np.complex128)
    for k in range(K):
        H += w[k] * val[k]
        J += w[k] * jac[k]
    return H, J, val, jac


def _newton(exps, coefs, eq, blk, K, m, maxdeg, x0, w, tol, maxit):
    """Returns (x, converged, iterations, last_step_norm, contraction)."""
    x = x0.copy()
    prev = -1.0
    contraction = 0.0
    for it in range(maxit):
        H, J, _, _ = _COMBINE(exps, coefs, eq, blk, K, m, maxdeg, x, w)
        dx, ok = _SOLVE(J, -H)
        if not ok:
            return x, False, it, -1.0, 1.0
        x = x + dx
        nd = np.sqrt(np.sum(np.abs(dx) ** 2))
        nx = np.sqrt(np.sum(np.abs(x) ** 2))
        if prev > 0:
            contraction = nd / prev
        if nd <= tol * (1.0 + nx):
            return x, True, it + 1, nd, contraction
        if prev > 0 and nd > 0.5 * prev:
            return x, False, it + 1, nd, contraction
        prev = nd
    return x, False, maxit, prev, contraction


def _track(exps, coefs, eq, blk, K, m, maxdeg, x0, w0, w1,
           h0, hmin, hmax, tol, maxit, escape, maxsteps):
    """Follow one root of H(., tau) from tau=0 to tau=1.

    Euler predictor on the Davidenko equation, Newton corrector; the step
    halves on corrector failure and doubles after four straight successes.
    """
    x = x0.copy()
    dw = w1 - w0
    tau = 0.0
    h = h0
    succ = 0
    steps = 0
    while tau < 1.0:
        if steps >= maxsteps:
            return x, 3, tau, steps
        if h < hmin:
            return x, 2, tau, steps
        step = h
        last = False
        if step >= 1.0 - tau:
            step = 1.0 - tau
            last = True
        w = w0 + tau * dw
        H, J, val, jac = _COMBINE(exps, coefs, eq, blk, K, m, maxdeg, x, w)
        Ht = np.zeros(m, dtype=np.complex128)
        for k in range(K):
            Ht += dw[k] * val[k]
        v, ok = _SOLVE(J, -Ht)
        steps += 1
        if not ok:
            h = h / 2.0
            succ = 0
            continue
        xp = x + step * v
        wn = w0 + (tau + step) * dw
        xc, conv, _, _, _ = _NEWTON(exps, coefs, eq, blk, K, m, maxdeg, xp, wn, tol, maxit)
        if conv:
            x = xc
            tau = 1.0 if last else tau + step
            succ += 1
            if succ >= 4:
                h = min(2.0 * h, hmax)
                succ = 0
            if np.sqrt(np.sum(np.abs(x) ** 2)) > escape:
                return x, 1, tau, steps
        else:
            h = h / 2.0
            succ = 0
    return x, 0, 1.0, steps


def _clone(f, namespace):
    return types.FunctionType(f.__code__, namespace, f.__name__, f.__defaults__, f.__closure__)


_np_ns = dict(globals())
_np_ns.update(_EVAL=_eval_numpy, _SOLVE=_solve_numpy)
_combine_np = _np_ns["_COMBINE"] = _clone(_combine, _np_ns)
_newton_np = _np_ns["_NEWTON"] = _clone(_newton, _np_ns)
_track_np = _clone(_track, _np_ns)

_EVAL = _eval_loop
_SOLVE = _solve_loop
_COMBINE = _combine_jit = njit(cache=True)(_combine)
_NEWTON = _newton_jit = njit(cache=True)(_newton)
_track_jit = njit(cache=True)(_track)


def _impl(use_numba: bool | None):
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and not USE_NUMBA:
        raise RuntimeError("numba kernels requested but disabled (MORSEPOLAR_NUMBA=0 or numba missing)")
    return (_combine_jit, _newton_jit, _track_jit) if use_numba else (_combine_np, _newton_np, _track_np)


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrackSettings:
    h0: float = 0.02
    hmin: float = 1e-14
    hmax: float = 0.05
    tol: float = 1e-9
    max_newton: int = 5
    escape_radius: float = 1e8
    max_steps: int = 20000


@dataclass
class TrackResult:
    x: np.ndarray
    status: int
    tau: float
    steps: int

    @property
    def status_name(self) -> str:
        return STATUS_NAMES[self.status]


def evaluate_weighted(system: WeightedSystem, x, w, use_numba: bool | None = None):
    combine, _, _ = _impl(use_numba)
    H, J, _, _ = combine(*system.arrays, np.asarray(x, dtype=np.complex128),
                         np.asarray(w, dtype=np.complex128))
    return H, J


def newton_weighted(system: WeightedSystem, x, w, tol: float = 1e-12, maxit: int = 8,
                    use_numba: bool | None = None):
    _, newton, _ = _impl(use_numba)
    return newton(*system.arrays, np.asarray(x, dtype=np.complex128),
                  np.asarray(w, dtype=np.complex128), tol, maxit)


def track_path(system: WeightedSystem, x0, w0, w1, settings: TrackSettings = TrackSettings(),
               use_numba: bool | None = None) -> TrackResult:
    _, _, track = _impl(use_numba)
    s = settings
    x, status, tau, steps = track(*system.arrays, np.asarray(x0, dtype=np.complex128),
                                  np.asarray(w0, dtype=np.complex128), np.asarray(w1, dtype=np.complex128),
                                  s.h0, s.hmin, s.hmax, s.tol, s.max_newton, s.escape_radius, s.max_steps)
    return TrackResult(np.asarray(x), int(status), float(tau), int(steps))
