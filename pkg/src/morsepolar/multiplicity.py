"""Local intersection multiplicities and the polar formula for n_P.

n_P = mult_P(Gamma, {f = f(P)}) - mult_P(Gamma, {l = l(P)})

The numeric multiplicity counts the points of Gamma on a nearby level
{g = g(P) + delta} that collapse to P as delta -> 0.  Two exact cross-checks
live here as well: the order of a resultant for plane curves and a Milnor
number from a Groebner staircase.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (InconclusiveMultiplicityError, MorsePolarError, NonIsolatedError,
                     ScopeError)
from .geometry import PolarCurve, scaled_residual
from .ideals import (ideal, krull_dimension, multiplication_matrices, quotient_dimension,
                     saturate)
from .polycore import LinearForm, Polynomial, Ring, jacobian_matrix
from .tracker import SquareSystem, solve_total_degree

log = logging.getLogger(__name__)



@dataclass
class LocalMultiplicityResult:
    point: np.ndarray
    against: Polynomial
    value: int
    method: str
    diagnostics: dict = field(default_factory=dict)


def _as_point(P) -> np.ndarray:
    return np.array([complex(v) for v in P], dtype=np.complex128)


def _on_curve(G: PolarCurve, x: np.ndarray, tol: float = 1e-8) -> bool:
    return all(scaled_residual(g, x) < tol for g in G.ideal.gb)


def default_radius(P, others: Sequence = ()) -> float:
    """Half the distance to the nearest other candidate, clipped to [1e-3, 1]."""
    P = _as_point(P)
    dists = [np.linalg.norm(_as_point(q) - P) for q in others]
    dists = [d for d in dists if d > 1e-12]
    r = min(dists) / 2.0 if dists else 1.0
    return float(min(max(r, 1e-3), 1.0))


def _exact_point(P) -> tuple[Fraction, ...] | None:
    try:
        out = []
        for v in P:
            if isinstance(v, (Fraction, int)):
                out.append(Fraction(v))
            else:
                z = complex(v)
                if z.imag != 0.0 or not z.real.is_integer():
                    return None
                out.append(Fraction(int(z.real)))
        return tuple(out)
    except (TypeError, ValueError):
        return None


def fibre_points(G: PolarCurve, g: Polynomial, P, seed: int = 0) -> list[np.ndarray] | None:
    """P together with the other points of Gamma on the level set of g through P.

    The local part at P is stripped exactly (saturation by a random linear
    form through P) before the rest is solved, so neighbours of P survive no
    matter how close they are.  Returns None when P is not rational or the
    fibre is not finite.
    """
    Pq = _exact_point(P)
    if Pq is None:
        return None
    ring = G.ideal.ring
    J = ideal(list(G.ideal.gb) + [g - Polynomial.constant(ring, g.eval_exact(Pq))], ring)
    if J.is_unit() or krull_dimension(J) != 0:
        return None
    rng = np.random.default_rng(seed + 41)
    L = Polynomial.zero(ring)
    for i in range(ring.nvars):
        c = int(rng.integers(1, 100)) * int(rng.choice([-1, 1]))
        L = L + (Polynomial.variable(ring, i) - Polynomial.constant(ring, Pq[i])) * c
    rest = saturate(J, ideal([L], ring))
    points = [_as_point(Pq)]
    if rest.is_unit():
        return points
    _, mats = multiplication_matrices(rest)
    M = sum(complex(rng.normal(), rng.normal()) * Mi for Mi in mats)
    _, vecs = np.linalg.eig(M)
    for k in range(vecs.shape[1]):
        v = vecs[:, k]
        vv = np.vdot(v, v)
        points.append(np.array([np.vdot(v, Mi @ v) / vv for Mi in mats]))
    return points


def _level_system(eqs: list[Polynomial], level: Polynomial, value: complex) -> SquareSystem:
    ring = level.ring
    zero, one = Polynomial.zero(ring), Polynomial.constant(ring, 1)
    # g - value written as  (g) * 1 + (-1) * value
    return SquareSystem(ring, (tuple(eqs) + (level,), tuple([zero] * len(eqs)) + (-one,)),
                        (1.0, value), ring.nvars, (), "level")


def _numeric_fibre(eqs, gens, level, Pc, seed, use_numba) -> list[np.ndarray]:
    """Regular points of Gamma on {level = level(P)} other than P, found numerically."""
    S = _level_system(eqs, level, level(Pc))
    sols = solve_total_degree(S, seed + 7, use_numba=use_numba).solutions
    tol = 1e-6 * (1.0 + np.linalg.norm(Pc))
    return [z for z in sols
            if np.linalg.norm(z - Pc) > tol and all(scaled_residual(h, z) < 1e-6 for h in gens)]


def _curve_equations(gens: list[Polynomial], rng) -> list[Polynomial]:
    ring = gens[0].ring
    n = ring.nvars
    if len(gens) == n - 1:
        return gens
    out = []
    for _ in range(n - 1):
        coeffs = rng.integers(1, 10, size=len(gens)) * rng.choice([-1, 1], size=len(gens))
        out.append(sum((g * int(a) for g, a in zip(gens, coeffs)), Polynomial.zero(ring)))
    return out


def _unit_scale(p: Polynomial) -> Polynomial:
    """p divided by its largest non-constant coefficient (in absolute value)."""
    top = max((abs(c) for e, c in p.terms.items() if any(e)), default=Fraction(0))
    return p / top if top else p


def local_intersection_multiplicity(G: PolarCurve, g: Polynomial, P, seed: int = 0, *,
                                    radius: float | None = None,
                                    others: Sequence = (),
                                    use_numba: bool | None = None) -> LocalMultiplicityResult:
    """mult_P(Gamma, {g = g(P)}) by counting the points that fall into P.

    The level g = g(P) + delta is solved once by a total-degree homotopy and
    then continued to delta/10, delta/100, ...  The ball radius r also
    respects the other points of Gamma on the fibre through P, so nothing
    converging elsewhere is counted.  For rational P the work happens in the
    exact coordinates x = P + r*xi, where the ball is the unit ball and the
    level can be taken very small without cancellation.  The level is
    deepened until every solution sits near its limit and the ball count
    agrees at two consecutive levels.
    """
    Pc = _as_point(P)
    if G.is_empty() or not _on_curve(G, Pc):
        return LocalMultiplicityResult(Pc, g, 0, "numeric-deformation", {"on_curve": False})
    ring = G.ideal.ring
    n = ring.nvars
    fibre = fibre_points(G, g, P, seed)
    r = radius if radius is not None else default_radius(Pc, others)
    if fibre is not None:
        gaps = [np.linalg.norm(q - Pc) for q in fibre]
        gaps = [d for d in gaps if d > 1e-12]
        if gaps:
            r = min(r, min(gaps) / 2.0)

    Pq = _exact_point(P)
    rng = np.random.default_rng(seed + 29)
    phase = np.exp(2j * np.pi * rng.random())
    if Pq is not None:
        rq = Fraction(f"{r:.3g}")
        r = float(rq)
        images = [Polynomial.constant(ring, Pq[i]) + Polynomial.variable(ring, i) * rq
                  for i in range(n)]
        gens = [_unit_scale(h.substitute(images)) for h in G.ideal.gb]
        moved = g.substitute(images)
        level = _unit_scale(moved - Polynomial.constant(ring, moved.eval_exact((0,) * n)))
        centre = np.zeros(n, dtype=np.complex128)
        ball = 1.0
        marks = None if fibre is None else [(q - Pc) / r for q in fibre]
        floor = 1e-30
        eqs = _curve_equations(gens, rng)
    else:
        gens = list(G.ideal.gb)
        level = _unit_scale(g)
        centre = Pc
        eqs = _curve_equations(gens, rng)
        # no exact fibre: its other points are the regular roots of the level through P
        fibre = [Pc] + _numeric_fibre(eqs, gens, level, Pc, seed, use_numba)
        gaps = [np.linalg.norm(q - Pc) for q in fibre[1:]]
        if gaps:
            r = min(r, min(gaps) / 2.0)
        ball = r
        marks = fibre
        floor = 1e-12 * (1.0 + abs(level(Pc)))
    gP = level(centre)

    def on_curve(z):
        return all(scaled_residual(h, z) < 1e-6 for h in gens)

    # start well away from P, where the level points are simple and well
    # conditioned; the decade continuation below brings them in
    delta = 1e-2 * ball * phase
    for _ in range(3):
        S = _level_system(eqs, level, gP + delta)
        sol = solve_total_degree(S, seed, use_numba=use_numba)
        crowded = any(np.linalg.norm(z - centre) < ball for z in sol.singular_points)
        if not crowded or abs(delta) >= 0.1 * ball:
            break
        delta = delta * 10.0
    states = [z for z in sol.solutions if on_curve(z)]
    system = S.weighted()
    alive = [True] * len(states)
    far = 1e3 * (1.0 + max(np.linalg.norm(q) for q in (marks or [centre])))

    def settled(z, ok):
        if np.linalg.norm(z) > far:
            return True
        if not ok:
            return False
        if marks is None:
            return True
        return any(np.linalg.norm(z - q) < ball for q in marks)

    def ball_count():
        return sum(1 for z, ok in zip(states, alive) if ok and np.linalg.norm(z - centre) < ball)

    counts = [ball_count()]
    calm = [all(settled(z, ok) for z, ok in zip(states, alive))]
    depth = 0
    while abs(delta) * 10.0 ** (-depth - 1) >= floor:
        w0 = np.array([1.0, gP + delta * 10.0 ** (-depth)])
        w1 = np.array([1.0, gP + delta * 10.0 ** (-depth - 1)])
        for k, z in enumerate(states):
            if alive[k]:
                res = kernels.track_path(system, z, w0, w1, use_numba=use_numba)
                states[k] = res.x
                alive[k] = res.status == kernels.OK
        depth += 1
        counts.append(ball_count())
        calm.append(all(settled(z, ok) for z, ok in zip(states, alive)))
        if calm[-1] and calm[-2] and counts[-1] == counts[-2]:
            break
    diag = {"radius": float(r), "delta": complex(delta), "counts": counts, "decades": depth,
            "solutions": len(states), "fibre_points": None if fibre is None else len(fibre),
            "rescaled": Pq is not None}
    if not (calm[-1] and calm[-2]) or counts[-1] != counts[-2]:
        raise InconclusiveMultiplicityError(
            f"local count did not stabilise: {counts[-2]} vs {counts[-1]} at the deepest levels",
            counts[-2:])
    return LocalMultiplicityResult(Pc, g, counts[-1], "numeric-deformation", diag)


# ---------------------------------------------------------------------------
# exact plane-curve check
# ---------------------------------------------------------------------------

def _univariate_in_v(p: Polynomial, u: Fraction) -> list[Fraction]:
    """Coefficients (ascending in v) of p(u, v) for rational u."""
    out: dict[int, Fraction] = {}
    for (a, b), c in p.terms.items():
        out[b] = out.get(b, Fraction(0)) + c * u ** a
    deg = max((k for k, v in out.items() if v), default=-1)
    return [out.get(k, Fraction(0)) for k in range(deg + 1)]


def _det_fraction(M: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            if M[r][i]:
                fac = M[r][i] / M[i][i]
                for c in range(i, n):
                    M[r][c] -= fac * M[i][c]
    return det


def _sylvester_resultant(a: list[Fraction], b: list[Fraction], da: int, db: int) -> Fraction:
    """Resultant of polynomials (ascending coefficients) of formal degrees da, db."""
    a = (a + [Fraction(0)] * (da + 1))[:da + 1][::-1]
    b = (b + [Fraction(0)] * (db + 1))[:db + 1][::-1]
    n = da + db
    if n == 0:
        return Fraction(1)
    M = []
    for i in range(db):
        M.append([Fraction(0)] * i + a + [Fraction(0)] * (n - da - 1 - i))
    for i in range(da):
        M.append([Fraction(0)] * i + b + [Fraction(0)] * (n - db - 1 - i))
    return _det_fraction(M)


def _interpolate(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Newton divided differences, returned as ascending monomial coefficients."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        new = [Fraction(0)] * n
        for k in range(n - 1):
            new[k + 1] += poly[k]
        for k in range(n):
            new[k] -= xs[i] * poly[k]
        new[0] += coef[i]
        poly = new
    return poly


def resultant_order_bivariate(G: PolarCurve, g: Polynomial, P, seed: int = 0) -> int:
    """Exact intersection multiplicity at a rational point P of a plane curve.

    After a random rational change of coordinates centred at P, the order
    at u = 0 of Res_v(Gamma, g - g(P)) equals the local intersection number.
    """
    ring = G.ideal.ring
    if ring.nvars != 2:
        raise ScopeError("resultant check needs two variables")
    gens = list(G.ideal.gb)
    if len(gens) != 1:
        raise ScopeError("resultant check needs a principal (plane curve) polar ideal")
    P = tuple(Fraction(v) for v in P)
    if gens[0].eval_exact(P) != 0:
        return 0
    rng = np.random.default_rng(seed + 53)
    gP = g.eval_exact(P)
    uv = Ring(("u", "v"))
    u, v = uv.gens()
    for _ in range(10):
        A = rng.integers(-7, 8, size=(2, 2))
        if A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0] == 0:
            continue
        images = [Polynomial.constant(uv, P[0]) + u * int(A[0, 0]) + v * int(A[0, 1]),
                  Polynomial.constant(uv, P[1]) + u * int(A[1, 0]) + v * int(A[1, 1])]
        F = gens[0].substitute(images)
        H = g.substitute(images) - Polynomial.constant(uv, gP)
        if H.is_zero():
            raise ScopeError("g is constant along the curve")
        dF, dH = F.degree, H.degree
        # leading v-coefficients must be nonzero constants for a faithful projection
        if _univariate_in_v(F, Fraction(0)).__len__() != dF + 1 or \
                _univariate_in_v(H, Fraction(0)).__len__() != dH + 1:
            continue
        npts = dF * dH + 1
        xs = [Fraction(k) for k in range(npts)]
        ys = [_sylvester_resultant(_univariate_in_v(F, x), _univariate_in_v(H, x), dF, dH)
              for x in xs]
        coeffs = _interpolate(xs, ys)
        for k, c in enumerate(coeffs):
            if c != 0:
                return k
        raise ScopeError("resultant vanishes identically: common component with g")
    raise ScopeError("could not find a generic projection")


# ---------------------------------------------------------------------------
# polar formula and Milnor oracle
# ---------------------------------------------------------------------------

@dataclass
class PolarMultiplicity:
    point: np.ndarray
    n_p: int
    mult_f: int
    mult_l: int
    diagnostics: dict = field(default_factory=dict)


def polar_multiplicities(G: PolarCurve, f: Polynomial, l: LinearForm, P, seed: int = 0, *,
                         others: Sequence = (), use_numba: bool | None = None) -> PolarMultiplicity:
    Pc = _as_point(P)
    if G.is_empty() or not _on_curve(G, Pc):
        return PolarMultiplicity(Pc, 0, 0, 0, {"on_curve": False})
    lp = l.to_polynomial(G.ideal.ring)
    mf = local_intersection_multiplicity(G, f, P, seed, others=others, use_numba=use_numba)
    ml = local_intersection_multiplicity(G, lp, P, seed + 1, others=others, use_numba=use_numba)
    n = mf.value - ml.value
    if n < 0:
        raise MorsePolarError(
            f"negative polar multiplicity {mf.value} - {ml.value} at {Pc}: l is not generic "
            "or a local count failed")
    return PolarMultiplicity(Pc, n, mf.value, ml.value,
                             {"f": mf.diagnostics, "l": ml.diagnostics})


def n_p_polar(G: PolarCurve, f: Polynomial, l: LinearForm, P, seed: int = 0, **kw) -> int:
    """mult_P(Gamma, f = f(P)) - mult_P(Gamma, l = l(P)); 0 off Gamma."""
    return polar_multiplicities(G, f, l, P, seed, **kw).n_p


def milnor_number_oracle(f: Polynomial, P, seed: int = 0) -> int:
    """Milnor number at a rational point, from Groebner staircases only.

    mu = dim R/J - dim R/(J : L^inf) with J the Jacobian ideal moved to the
    origin and L a random linear form; saturating by L strips exactly the
    origin's local contribution.  Done for two forms, which must agree.
    """
    ring = f.ring
    n = ring.nvars
    P = tuple(Fraction(v) for v in P)
    shift = [Polynomial.variable(ring, i) + Polynomial.constant(ring, P[i]) for i in range(n)]
    g = f.substitute(shift)
    J = ideal([p for p in (g.diff(i) for i in range(n)) if not p.is_zero()], ring)
    if J.is_unit() or any(p.eval_exact((0,) * n) != 0 for p in J.gb):
        return 0
    if krull_dimension(J) != 0:
        raise NonIsolatedError("Jacobian ideal is not zero-dimensional")
    total = quotient_dimension(J)
    rng = np.random.default_rng(seed + 71)
    values = []
    for _ in range(2):
        coeffs = rng.integers(1, 50, size=n) * rng.choice([-1, 1], size=n)
        L = sum((Polynomial.variable(ring, i) * int(c) for i, c in enumerate(coeffs)),
                Polynomial.zero(ring))
        away = saturate(J, ideal([L], ring))
        values.append(total - (0 if away.is_unit() else quotient_dimension(away)))
    if values[0] != values[1]:
        raise InconclusiveMultiplicityError("Milnor localisation disagrees between forms", values)
    return values[0]
