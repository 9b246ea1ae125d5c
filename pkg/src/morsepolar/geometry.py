"""Loci built from ideals: Sing X, stratified critical loci, polar curves,
and the finite set of candidate limit points.

All loci are set-theoretic; no radicals are taken.  Lower-dimensional strata
are either supplied by the caller (closures of strata, as ideals) or obtained
by iterating the singular locus, which is enough for the examples at hand but
is not a Whitney stratification in general.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (ConstantFunctionError, NonGenericError, NotZeroDimensionalError,
                     ScopeError)
from .ideals import (IdealBasis, ideal, intersect, krull_dimension, minors,
                     multiplication_matrices, normal_form, saturate, sum_ideals,
                     unit_ideal, zero_ideal)
from .polycore import LinearForm, Polynomial, Ring, jacobian_matrix, sample_generic_linear

log = logging.getLogger(__name__)

MAX_LINEAR_DRAWS = 5


@dataclass(frozen=True)
class VarietySpec:
    """An affine variety X in C^N together with optional lower strata.

    ``strata`` holds ideals of the closures of the lower-dimensional strata
    (any order).  ``None`` means: derive them by iterating the singular locus.
    """

    ideal: IdealBasis
    codim: int
    strata: tuple[IdealBasis, ...] | None = None

    @classmethod
    def from_polys(cls, polys: Sequence[Polynomial], ring: Ring,
                   strata: Sequence[Sequence[Polynomial]] | None = None) -> "VarietySpec":
        polys = [p for p in polys if not p.is_zero()]
        I = ideal(polys, ring) if polys else zero_ideal(ring)
        if polys and I.is_unit():
            raise ScopeError("the variety is empty (unit ideal)")
        codim = ring.nvars - krull_dimension(I)
        decl = None
        if strata is not None:
            decl = tuple(ideal(list(s), ring) for s in strata)
        return cls(I, codim, decl)

    @classmethod
    def affine_space(cls, ring: Ring) -> "VarietySpec":
        return cls(zero_ideal(ring), 0, ())

    @property
    def ring(self) -> Ring:
        return self.ideal.ring

    @property
    def dim(self) -> int:
        return self.ring.nvars - self.codim

    @property
    def equations(self) -> list[Polynomial]:
        """Generators used for Jacobians: the user's, else the Groebner basis."""
        gens = [g for g in self.ideal.generators if not g.is_zero()]
        return gens or list(self.ideal.gb)


@dataclass(frozen=True)
class PolarCurve:
    ideal: IdealBasis
    linear_form: LinearForm
    source_function: Polynomial

    @property
    def dimension(self) -> int:
        return krull_dimension(self.ideal)

    def is_empty(self) -> bool:
        return self.ideal.is_unit()


@dataclass
class CandidatePointSet:
    points: list[np.ndarray]
    exact: list[tuple[Fraction, ...] | None]
    local_lengths: list[int]
    defining_ideal: IdealBasis
    residuals: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def is_exact(self, k: int) -> bool:
        return self.exact[k] is not None


# ---------------------------------------------------------------------------
# singular loci and strata
# ---------------------------------------------------------------------------

def _closed_set(I: IdealBasis) -> VarietySpec:
    return VarietySpec(I, I.ring.nvars - krull_dimension(I), ())


def singular_locus_ideal(X: VarietySpec) -> IdealBasis:
    """X plus the codim-sized minors of its Jacobian."""
    if X.codim == 0:
        return unit_ideal(X.ring)
    eqs = X.equations
    jac = jacobian_matrix(eqs)
    return ideal(eqs + minors(jac, X.codim), X.ring)


def default_strata(X: VarietySpec) -> list[IdealBasis]:
    """Closures of lower strata from iterated singular loci (top one first)."""
    out = []
    current = X
    while True:
        S = singular_locus_ideal(current)
        if S.is_unit():
            return out
        dim = krull_dimension(S)
        if dim >= current.dim:
            raise ScopeError(
                "singular locus does not drop dimension (non-reduced equations?); "
                "declare the strata explicitly")
        out.append(S)
        if dim == 0:
            return out
        current = _closed_set(S)


def lower_strata(X: VarietySpec) -> list[IdealBasis]:
    return list(X.strata) if X.strata is not None else default_strata(X)


def _check_nonconstant(X: VarietySpec, f: Polynomial):
    if f.is_constant():
        raise ConstantFunctionError("f is constant")
    if X.codim and normal_form(f, X.ideal).is_constant():
        raise ConstantFunctionError("f is constant on X")


def stratum_critical_ideal(Z: VarietySpec, f: Polynomial) -> IdealBasis:
    """Closure of the critical locus of f on the regular part of Z."""
    if Z.dim <= 0:
        return Z.ideal
    eqs = Z.equations if Z.codim else []
    df = [f.diff(i) for i in range(f.nvars)]
    rows = jacobian_matrix(eqs) + [df] if eqs else [df]
    gens = eqs + minors(rows, Z.codim + 1)
    crit = ideal(gens, Z.ring)
    if Z.codim:
        crit = saturate(crit, singular_locus_ideal(Z))
    return crit


def stratified_critical_ideal(X: VarietySpec, f: Polynomial) -> IdealBasis:
    """Ideal of Sing_W f: critical points of f on every stratum, united."""
    _check_nonconstant(X, f)
    result = stratum_critical_ideal(X, f)
    for S in lower_strata(X):
        part = stratum_critical_ideal(_closed_set(S), f)
        result = intersect(result, part)
    return result


# ---------------------------------------------------------------------------
# polar curve
# ---------------------------------------------------------------------------

def polar_curve_ideal(X: VarietySpec, f: Polynomial, l: LinearForm, *,
                      crit: IdealBasis | None = None) -> PolarCurve:
    """Closure of {rank Jac(l, f) < 2 on X_reg} minus the critical locus of f."""
    _check_nonconstant(X, f)
    ring = X.ring
    lp = l.to_polynomial(ring)
    eqs = X.equations if X.codim else []
    rows = (jacobian_matrix(eqs) if eqs else []) + [
        [lp.diff(i) for i in range(ring.nvars)],
        [f.diff(i) for i in range(ring.nvars)],
    ]
    r = X.codim + 2
    gens = list(eqs)
    if r <= ring.nvars:
        gens += minors(rows, r)
    base = ideal(gens, ring) if gens else zero_ideal(ring)
    if crit is None:
        crit = stratified_critical_ideal(X, f)
    gamma = saturate(base, crit)
    gamma = saturate(gamma, singular_locus_ideal(X))
    curve = PolarCurve(gamma, l, f)
    if curve.dimension > 1:
        raise NonGenericError(f"polar locus has dimension {curve.dimension} > 1")
    return curve


def generic_polar_curve(X: VarietySpec, f: Polynomial, seed: int,
                        linear_form: LinearForm | None = None,
                        max_draws: int = MAX_LINEAR_DRAWS):
    """Draw l until the polar locus is a curve (or empty) meeting Sing_W f finitely.

    Returns ``(polar, crit, candidate_ideal)``.  A supplied ``linear_form`` is
    used as is, without re-drawing.
    """
    crit = stratified_critical_ideal(X, f)
    last = None
    for attempt in range(max_draws if linear_form is None else 1):
        l = linear_form or sample_generic_linear(X.ring.nvars, seed + 7919 * attempt)
        try:
            G = polar_curve_ideal(X, f, l, crit=crit)
            cand = candidate_ideal(G, crit)
            if not cand.is_unit() and krull_dimension(cand) != 0:
                raise NonGenericError("candidate system is not zero-dimensional")
            return G, crit, cand
        except NonGenericError as exc:
            last = exc
            log.info("linear form %s rejected: %s", l.coefficients, exc)
    raise NonGenericError(f"non-generic configuration after {max_draws} draws: {last}")


# ---------------------------------------------------------------------------
# candidate points
# ---------------------------------------------------------------------------

def candidate_ideal(G: PolarCurve, crit: IdealBasis) -> IdealBasis:
    if G.is_empty():
        return G.ideal
    return sum_ideals(G.ideal, crit)


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    n = len(values)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _rationalize(z: complex, tol: float = 1e-8, max_den: int = 10**4):
    if abs(z.imag) > tol:
        return None
    q = Fraction(z.real).limit_denominator(max_den)
    if abs(float(q) - z.real) > tol * max(1.0, abs(z.real)):
        return None
    return q


def scaled_residual(p: Polynomial, x: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(x)))) if len(x) else 1.0
    size = sum(abs(float(c)) for c in p.terms.values()) * scale ** max(p.degree, 0)
    return abs(p(x)) / size if size else 0.0


def solve_zero_dimensional(I: IdealBasis, seed: int = 0) -> CandidatePointSet:
    """All points of V(I) for zero-dimensional I, via multiplication matrices.

    Eigenvalues of a random combination are clustered; each cluster's
    invariant subspace (ordered Schur form) gives the point as the averaged
    trace of each coordinate's multiplication matrix, which stays accurate
    for points of high local multiplicity.
    """
    if I.is_unit():
        return CandidatePointSet([], [], [], I, [])
    if krull_dimension(I) != 0:
        raise NotZeroDimensionalError("candidate system is not zero-dimensional")
    n = I.ring.nvars
    _, mats = multiplication_matrices(I)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    M = sum(ci * Mi for ci, Mi in zip(c, mats))
    eig = np.linalg.eigvals(M)
    scale = max(1.0, float(np.max(np.abs(eig))))
    groups = _cluster(eig, 1e-3 * scale)
    points, exact, lengths, residuals = [], [], [], []
    for g in groups:
        center = eig[g].mean()
        radius = max(abs(eig[i] - center) for i in g) + 1e-3 * scale
        T, Z, sdim = scipy.linalg.schur(M, output="complex",
                                        sort=lambda z, c0=center, r=radius: abs(z - c0) <= r)
        if sdim != len(g):
            log.warning("Schur reordering picked %d eigenvalues for a cluster of %d", sdim, len(g))
        if sdim == 0:
            # reordering missed a simple eigenvalue; read the point off its eigenvector
            w, V = np.linalg.eig(M)
            Q = V[:, [int(np.argmin(abs(w - center)))]]
            Q = Q / np.linalg.norm(Q)
            sdim = 1
        else:
            Q = Z[:, :sdim]
        pt = np.array([np.trace(Q.conj().T @ Mi @ Q) / sdim for Mi in mats])
        q = [_rationalize(z) for z in pt]
        ex = None
        if all(v is not None for v in q):
            if all(gen.eval_exact(q) == 0 for gen in I.gb):
                ex = tuple(q)
                pt = np.array([complex(v) for v in q])
        res = 0.0 if ex is not None else max(scaled_residual(gen, pt) for gen in I.gb)
        points.append(pt)
        exact.append(ex)
        lengths.append(sdim)
        residuals.append(res)
    order = sorted(range(len(points)), key=lambda k: tuple(np.round(np.concatenate(
        [points[k].real, points[k].imag]), 9)))
    return CandidatePointSet([points[k] for k in order], [exact[k] for k in order],
                             [lengths[k] for k in order], I, [residuals[k] for k in order])


def candidate_limit_points(G: PolarCurve, X: VarietySpec, f: Polynomial,
                           crit: IdealBasis | None = None, seed: int = 0) -> CandidatePointSet:
    """Points of Gamma meeting Sing_W f: the only possible finite limits."""
    if crit is None:
        crit = stratified_critical_ideal(X, f)
    return solve_zero_dimensional(candidate_ideal(G, crit), seed)
