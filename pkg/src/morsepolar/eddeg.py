"""End-to-end pipelines: ED degree at a data point u, by polar multiplicities
and by following the Morse points of d_u - t*l directly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import IllConditionedError, MorsePolarError, NonIsolatedError
from .geometry import (VarietySpec, generic_polar_curve,
                       solve_zero_dimensional, stratified_critical_ideal)
from .ideals import krull_dimension
from .multiplicity import polar_multiplicities
from .polycore import LinearForm, Polynomial, sample_generic_linear
from .tracker import (build_critical_system, classify_limits, on_variety,
                      solve_total_degree, track_family)

log = logging.getLogger(__name__)

VERIFIED, ASSERTED = "VERIFIED", "ASSERTED"
OK, FAILED, ESCAPES = "OK", "FAILED", "ESCAPES"
MAX_GENERIC_DRAWS = 3


def distance_function(X: VarietySpec, u: Sequence) -> Polynomial:
    ring = X.ring
    out = Polynomial.zero(ring)
    for i, ui in enumerate(u):
        d = Polynomial.variable(ring, i) - Polynomial.constant(ring, Fraction(ui))
        out = out + d * d
    return out


@dataclass
class EDProblem:
    """Squared distance to u on X.  ``function`` overrides d_u (escape demos)."""

    X: VarietySpec
    u: tuple[Fraction, ...] | None
    seed: int = 0
    function: Polynomial | None = None
    linear_form: LinearForm | None = None

    def __post_init__(self):
        if self.function is None:
            if self.u is None or len(self.u) != self.X.ring.nvars:
                raise ValueError("data point must have one coordinate per variable")
            self.u = tuple(Fraction(v) for v in self.u)

    @property
    def f(self) -> Polynomial:
        return self.function if self.function is not None else distance_function(self.X, self.u)


@dataclass
class PointReport:
    point: np.ndarray
    exact: tuple[Fraction, ...] | None
    n_p: int | None = None
    mult_f: int | None = None
    mult_l: int | None = None
    tracked: int | None = None


@dataclass
class EDReport:
    ed_degree: int | None
    per_point: list[PointReport]
    null_points: list[PointReport]
    m_infinity: int | None
    total_morse: int | None
    method: str
    status: str = OK
    provenance: str | None = None
    agreement: dict[str, bool] = field(default_factory=dict)
    linear_form: LinearForm | None = None
    t_zero: complex | None = None
    warnings: list[str] = field(default_factory=list)


def _candidates(prob: EDProblem, f: Polynomial, polar_required: bool):
    crit = stratified_critical_ideal(prob.X, f)
    if not crit.is_unit() and krull_dimension(crit) > 0:
        if polar_required:
            raise NonIsolatedError(
                "stratified critical locus is not finite; the polar formula does not apply "
                "(use the tracking method or stratcalc)")
        return None, None, None
    G, crit, cand = generic_polar_curve(prob.X, f, prob.seed, prob.linear_form)
    return G, crit, solve_zero_dimensional(cand, prob.seed)


def _same_point(a, b, tol=1e-6) -> bool:
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) <= tol * (1 + np.linalg.norm(b))


def ed_degree_polar(prob: EDProblem, assert_no_escape: bool = False,
                    use_numba: bool | None = None) -> EDReport:
    """Sum of n_P = mult_P(Gamma, f) - mult_P(Gamma, l) over the candidates.

    The no-escape hypothesis is checked by running the tracker anyway.  If the
    tracker cannot finish, the result stands only when the caller asserted
    that nothing escapes (provenance ASSERTED).
    """
    f = prob.f
    G, crit, cands = _candidates(prob, f, True)
    l = G.linear_form
    points, nulls = [], []
    for k, pt in enumerate(cands.points):
        src = cands.exact[k] if cands.exact[k] is not None else pt
        pm = polar_multiplicities(G, f, l, src, prob.seed, others=cands.points, use_numba=use_numba)
        rep = PointReport(pt, cands.exact[k], pm.n_p, pm.mult_f, pm.mult_l)
        (points if pm.n_p > 0 else nulls).append(rep)
    total = sum(p.n_p for p in points)
    report = EDReport(total, points, nulls, None, None, "polar", linear_form=l)
    try:
        lim = classify_limits(track_family(prob.X, f, l, prob.seed, use_numba=use_numba), cands)
    except (IllConditionedError, MorsePolarError) as exc:
        if not assert_no_escape:
            raise
        report.provenance = ASSERTED
        report.warnings.append(f"escape check could not run: {exc}")
        return report
    report.m_infinity = lim.m_infinity
    report.total_morse = lim.total_morse
    report.t_zero = lim.t_zero
    report.provenance = VERIFIED
    if lim.m_infinity:
        report.ed_degree = None
        report.status = FAILED if assert_no_escape else ESCAPES
        report.warnings.append(
            f"{lim.m_infinity} Morse point(s) escape to infinity; the polar sum "
            f"{total} is not the ED degree")
    return report


def ed_degree_tracking(prob: EDProblem, use_numba: bool | None = None, **track_kw) -> EDReport:
    """Count Morse points of f - t*l at small t and where they go as t -> 0."""
    f = prob.f
    G, crit, cands = _candidates(prob, f, False)
    if G is None:
        l = prob.linear_form or sample_generic_linear(prob.X.ring.nvars, prob.seed)
    else:
        l = G.linear_form
    bundle = track_family(prob.X, f, l, prob.seed, use_numba=use_numba, **track_kw)
    lim = classify_limits(bundle, cands)
    points = [PointReport(lp.point, lp.exact, lp.multiplicity, tracked=lp.multiplicity)
              for lp in lim.limit_points]
    report = EDReport(None, points, [], lim.m_infinity, lim.total_morse, "tracking",
                      linear_form=l, t_zero=lim.t_zero, warnings=list(lim.warnings))
    if cands is None:
        report.warnings.append("non-isolated critical locus: multiplicities are empirical")
    if lim.m_infinity == 0:
        report.ed_degree = lim.total_morse
        report.provenance = VERIFIED
    else:
        report.status = ESCAPES
        report.warnings.append(
            f"{lim.m_infinity} Morse point(s) escape to infinity; no ED degree claimed")
    return report


def ed_degree_both(prob: EDProblem, assert_no_escape: bool = False,
                   use_numba: bool | None = None) -> EDReport:
    """Run both pipelines and merge them; any disagreement marks the report FAILED."""
    polar = ed_degree_polar(prob, assert_no_escape, use_numba)
    track = ed_degree_tracking(prob, use_numba)
    merged = polar
    merged.method = "both"
    agree_points = len(polar.per_point) == len(track.per_point)
    for p in polar.per_point:
        match = [q for q in track.per_point if _same_point(q.point, p.point)]
        p.tracked = match[0].tracked if match else 0
        agree_points &= p.tracked == p.n_p
    merged.agreement = {
        "ed_degree": polar.ed_degree == track.ed_degree,
        "per_point": bool(agree_points),
        "m_infinity": polar.m_infinity == track.m_infinity,
    }
    if not all(merged.agreement.values()) and merged.status == OK:
        merged.status = FAILED
        merged.warnings.append("polar and tracking pipelines disagree")
    merged.warnings.extend(w for w in track.warnings if w not in merged.warnings)
    return merged


# ---------------------------------------------------------------------------
# generic data point
# ---------------------------------------------------------------------------

def random_data_point(N: int, rng) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(rng.integers(-40, 41)), int(rng.integers(7, 20))) for _ in range(N))


def count_critical_points(X: VarietySpec, f: Polynomial, seed: int = 0,
                          use_numba: bool | None = None) -> int:
    S = build_critical_system(X, f, None, 0.0, seed)
    sols = solve_total_degree(S, seed, use_numba=use_numba).solutions
    return sum(1 for z in sols if on_variety(S, z, X.codim))


def ed_degree_generic(X: VarietySpec, seed: int = 0, use_numba: bool | None = None) -> int:
    """ED degree for a random rational u; two independent draws must agree."""
    rng = np.random.default_rng(seed + 211)
    last = None
    for _ in range(MAX_GENERIC_DRAWS):
        counts = []
        for _ in range(2):
            u = random_data_point(X.ring.nvars, rng)
            counts.append(count_critical_points(X, distance_function(X, u), seed, use_numba))
        if counts[0] == counts[1]:
            return counts[0]
        last = counts
        log.info("generic ED draws disagree: %s", counts)
    raise IllConditionedError(f"generic ED degree draws kept disagreeing: {last}")
