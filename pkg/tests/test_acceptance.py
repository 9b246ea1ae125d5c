"""Acceptance suite: one test per acceptance criterion.

Each test prints a single PASS/FAIL line with its wall time.  Run it alone
with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
Independent oracles (sympy, closed forms, Groebner staircases) are evaluated
before the code under test.
"""
from __future__ import annotations

import random
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy

sys.path.insert(0, str(Path(__file__).resolve().parent))

from morsepolar.eddeg import (EDProblem, distance_function, ed_degree_generic, ed_degree_polar,
                              ed_degree_tracking, random_data_point)
from morsepolar.geometry import (VarietySpec, generic_polar_curve, polar_curve_ideal,
                                 solve_zero_dimensional)
from morsepolar.ideals import krull_dimension
from morsepolar.multiplicity import (local_intersection_multiplicity, milnor_number_oracle,
                                     n_p_polar, polar_multiplicities, resultant_order_bivariate)
from morsepolar.polycore import LinearForm, Ring, parse_polynomial, sample_generic_linear
from morsepolar.stratcalc import closed_form_nv, siersma_identity_check, solve_nv
from morsepolar.tracker import ESCAPED, classify_limits, track_family

from test_stratcalc import random_instance

R2 = Ring(("x", "y"))
R3 = Ring(("x", "y", "z"))
CARDIOID = "(x^2 + y^2 + x)^2 - (x^2 + y^2)"
O2 = (Fraction(0), Fraction(0))
MILNOR_CASES = ["x^3 + y^3", "x^3 - y^2", "x^2*y + y^4"]


def p2(text):
    return parse_polynomial(text, R2)


def cardioid():
    return VarietySpec.from_polys([p2(CARDIOID)], R2)


def plane():
    return VarietySpec.affine_space(R2)


def crossing_planes():
    X = VarietySpec.from_polys([parse_polynomial("x^2 - y^2", R3)], R3)
    return X, parse_polynomial("x + 2*y + z^2", R3)


@contextmanager
def criterion(number: int, title: str, budget: float | None = None, capsys=None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        if ok and budget is not None and elapsed >= budget:
            ok = False
            title += f" (over the {budget:g} s budget)"
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}  [{elapsed:.2f} s]"
        if capsys is not None:
            with capsys.disabled():
                print("\n" + line)
        else:
            print(line)
    if budget is not None:
        assert elapsed < budget, f"criterion {number} took {elapsed:.1f} s (budget {budget} s)"


def _candidates(X, f, seed, l=None):
    G, crit, cand = generic_polar_curve(X, f, seed, l)
    return G, solve_zero_dimensional(cand, seed)


# ---------------------------------------------------------------------------
# 1. cardioid golden test
# ---------------------------------------------------------------------------

def check_cardioid():
    X = cardioid()
    f = p2("x^2 + y^2")
    G, cands = _candidates(X, f, 1)
    l = G.linear_form
    O, P = O2, (Fraction(-2), Fraction(0))
    pm_o = polar_multiplicities(G, f, l, O, 1, others=cands.points)
    pm_p = polar_multiplicities(G, f, l, P, 1, others=cands.points)
    assert (pm_o.mult_f, pm_o.mult_l, pm_o.n_p) == (4, 2, 2)
    assert (pm_p.mult_f, pm_p.mult_l, pm_p.n_p) == (2, 1, 1)
    assert n_p_polar(G, f, l, O, 1, others=cands.points) == 2
    polar = ed_degree_polar(EDProblem(X, (0, 0), seed=1))
    track = ed_degree_tracking(EDProblem(X, (0, 0), seed=1))
    assert polar.ed_degree == track.ed_degree == 3
    assert polar.m_infinity == track.m_infinity == 0
    tracked = {tuple(p.exact): p.tracked for p in track.per_point}
    assert tracked == {O: 2, P: 1}


def test_criterion_1_cardioid(capsys):
    with criterion(1, "cardioid: mult_O 4 and 2, n_O = 2, n_P = 1, EDdeg 3, m_inf 0", 30, capsys):
        check_cardioid()


# ---------------------------------------------------------------------------
# 2. crossing planes
# ---------------------------------------------------------------------------

def check_crossing_planes():
    X, f = crossing_planes()
    G = polar_curve_ideal(X, f, LinearForm((0, 0, 1)))
    assert G.ideal.is_unit() and krull_dimension(G.ideal) == -1
    assert n_p_polar(G, f, G.linear_form, (0, 0, 0)) == 0
    lim = classify_limits(track_family(X, f, LinearForm((0, 0, 1)), 1), None)
    assert lim.total_morse == 0 and lim.limit_points == []


def test_criterion_2_crossing_planes(capsys):
    with criterion(2, "crossing planes: polar locus empty, n_O = 0", 10, capsys):
        check_crossing_planes()


# ---------------------------------------------------------------------------
# 3. smooth / Milnor bridge
# ---------------------------------------------------------------------------

def check_milnor_bridge():
    expected = {"x^3 + y^3": 4, "x^3 - y^2": 2, "x^2*y + y^4": 5}
    mus = {text: milnor_number_oracle(p2(text), O2) for text in MILNOR_CASES}
    assert mus == expected
    for text, mu in mus.items():
        f = p2(text)
        G, cands = _candidates(plane(), f, 1)
        n_polar = n_p_polar(G, f, G.linear_form, O2, 1, others=cands.points)
        lim = classify_limits(track_family(plane(), f, G.linear_form, 1), cands)
        assert lim.m_infinity == 0
        assert lim.multiplicity_at([0, 0]) == n_polar == mu, text


def test_criterion_3_milnor_bridge(capsys):
    with criterion(3, "smooth plane: tracker = polar formula = Milnor number (4, 2, 5)", 60, capsys):
        check_milnor_bridge()


# ---------------------------------------------------------------------------
# 4. conservation over three independent (l, seed) draws
# ---------------------------------------------------------------------------

def suite_problems():
    circle = VarietySpec.from_polys([p2("x^2 + y^2 - 1")], R2)
    parabola = VarietySpec.from_polys([p2("y - x^2")], R2)
    Xc, fc = crossing_planes()
    out = [("cardioid", cardioid(), p2("x^2 + y^2")),
           ("circle", circle, distance_function(circle, (Fraction(1, 3), Fraction(2, 7)))),
           ("parabola", parabola, distance_function(parabola, (Fraction(3, 5), Fraction(-2, 9)))),
           ("escape", plane(), p2("x + x^2*y")),
           ("crossing_planes", Xc, fc)]
    out += [(text, plane(), p2(text)) for text in MILNOR_CASES]
    return out


def check_conservation():
    rows = []
    for name, X, f in suite_problems():
        for seed in (11, 12, 13):
            l = sample_generic_linear(X.ring.nvars, seed)
            G, cands = _candidates(X, f, seed, l)
            lim = classify_limits(track_family(X, f, l, seed), cands)
            polar_sum = sum(n_p_polar(G, f, l, cands.exact[k] or cands.points[k], seed,
                                      others=cands.points) for k in range(len(cands)))
            assert lim.total_morse == polar_sum + lim.m_infinity, (name, seed)
            assert lim.total_morse == sum(p.multiplicity for p in lim.limit_points) + lim.m_infinity
            rows.append((name, seed, lim.total_morse))
    return rows


def test_criterion_4_conservation(capsys):
    with criterion(4, "total Morse count = sum n_P + m_inf on every suite problem, 3 draws each",
                   None, capsys):
        check_conservation()


# ---------------------------------------------------------------------------
# 5. escape detection
# ---------------------------------------------------------------------------

def check_escape():
    f = p2("x + x^2*y")
    l = sample_generic_linear(2, 1)
    # closed-form oracle: 1 + 2xy - t a = 0, x^2 - t b = 0  =>  x = +-sqrt(t b),
    # y = (t a - 1) / (2x), so |y| ~ |t|^(-1/2) on both branches
    big = max(abs(c) for c in l.coefficients)
    a, b = (float(c / big) for c in l.coefficients)
    B = track_family(plane(), f, l, 1)
    assert len(B.paths) == 2
    for path, (k, t) in zip(B.paths, [(0, B.t_schedule[0])] * 2):
        x = path.states[0][0]
        y = path.states[0][1]
        assert abs(x * x - t * b) < 1e-9
        assert abs(y - (t * a - 1) / (2 * x)) < 1e-6 * abs(y)
    lim = classify_limits(B, None)
    assert [p.status for p in B.paths] == [ESCAPED, ESCAPED]
    assert lim.m_infinity == 2 and lim.limit_points == []
    G, cands = _candidates(plane(), f, 1, l)
    assert len(cands) == 0


def test_criterion_5_escape(capsys):
    with criterion(5, "x + x^2*y: both Morse points escape, m_inf = 2, empty limit set", 10, capsys):
        check_escape()


# ---------------------------------------------------------------------------
# 6. positivity
# ---------------------------------------------------------------------------

def _gradient_vanishes(X, f, P) -> bool:
    """grad f at P lies in the span of the gradients of X's equations (order >= 2 on X)."""
    gf = np.array([float(f.diff(i).eval_exact(P)) for i in range(len(P))])
    hs = X.equations if X.codim else []
    A = np.array([[float(h.diff(i).eval_exact(P)) for i in range(len(P))] for h in hs]).reshape(-1, len(P))
    if not A.size or np.allclose(A, 0):
        return np.allclose(gf, 0)
    coef, *_ = np.linalg.lstsq(A.T, gf, rcond=None)
    return np.allclose(A.T @ coef, gf)


def check_positivity():
    checked = 0
    for name, X, f in suite_problems():
        G, cands = _candidates(X, f, 1)
        for k, P in enumerate(cands.exact):
            if P is None or not _gradient_vanishes(X, f, P):
                continue
            n = n_p_polar(G, f, G.linear_form, P, 1, others=cands.points)
            assert n > 0, (name, P)
            checked += 1
    assert checked >= 4
    return checked


def test_criterion_6_positivity(capsys):
    with criterion(6, "n_P > 0 wherever grad(f - f(P)) vanishes on X", None, capsys):
        check_positivity()


# ---------------------------------------------------------------------------
# 7. stratcalc properties
# ---------------------------------------------------------------------------

def check_stratcalc():
    rng = random.Random(2024)
    for _ in range(100):
        P, D = random_instance(rng)
        res = solve_nv(P, D, strict=False)
        assert res.reassembled_mu == {v: D.mu[v] for v in P.singular_ids()}
    for _ in range(1000):
        n, chi, k = rng.randint(1, 12), rng.randint(-100, 100), rng.randint(0, 100)
        assert siersma_identity_check(n, chi, k)[0] == k
    for _ in range(100):
        P, D = random_instance(rng)
        assert solve_nv(P, D, strict=False).n == closed_form_nv(P, D)


def test_criterion_7_stratcalc(capsys):
    with criterion(7, "round trip x100, Siersma chain x1000, microlocal = closed form x100", 5, capsys):
        check_stratcalc()


# ---------------------------------------------------------------------------
# 8. generic data points
# ---------------------------------------------------------------------------

def _circle_oracle(u) -> int:
    x, y = sympy.symbols("x y")
    sols = sympy.solve([x**2 + y**2 - 1, (x - u[0]) * y - (y - u[1]) * x], [x, y], dict=True)
    return len({(sympy.nsimplify(s[x]), sympy.nsimplify(s[y])) for s in sols})


def check_generic():
    rng = np.random.default_rng(8)
    u_circle = random_data_point(2, rng)
    assert _circle_oracle([sympy.Rational(v.numerator, v.denominator) for v in u_circle]) == 2
    circle = VarietySpec.from_polys([p2("x^2 + y^2 - 1")], R2)
    assert ed_degree_generic(cardioid(), 0) == 3
    assert ed_degree_generic(circle, 0) == 2
    for X, expected in ((cardioid(), 3), (circle, 2)):
        u = random_data_point(2, rng)
        rep = ed_degree_polar(EDProblem(X, u, seed=4))
        assert rep.ed_degree == expected
        assert rep.per_point and all(p.n_p == 1 for p in rep.per_point)


def test_criterion_8_generic(capsys):
    with criterion(8, "generic u: EDdeg cardioid 3, circle 2, every n_P = 1", None, capsys):
        check_generic()


# ---------------------------------------------------------------------------
# 9. exact / numeric multiplicity agreement
# ---------------------------------------------------------------------------

def check_exact_numeric():
    cases = [(cardioid(), p2("x^2 + y^2"))] + [(plane(), p2(t)) for t in MILNOR_CASES]
    compared = 0
    for X, f in cases:
        for seed in (1, 2, 3):
            G, cands = _candidates(X, f, seed)
            lp = G.linear_form.to_polynomial(R2)
            for P in cands.exact:
                for g, s in ((f, seed), (lp, seed + 1)):
                    exact = resultant_order_bivariate(G, g, P, seed)
                    numeric = local_intersection_multiplicity(G, g, P, s, others=cands.points).value
                    assert exact == numeric, (str(f), seed, P, str(g))
                    compared += 1
    return compared


def test_criterion_9_exact_numeric(capsys):
    with criterion(9, "resultant order = numeric local multiplicity on all N=2 tests", None, capsys):
        check_exact_numeric()


CHECKS = [
    (1, "cardioid golden test", check_cardioid, 30),
    (2, "crossing planes golden test", check_crossing_planes, 10),
    (3, "smooth / Milnor bridge", check_milnor_bridge, 60),
    (4, "conservation law", check_conservation, None),
    (5, "escape detection", check_escape, 10),
    (6, "positivity", check_positivity, None),
    (7, "stratcalc properties", check_stratcalc, 5),
    (8, "generic data points", check_generic, None),
    (9, "exact / numeric multiplicity agreement", check_exact_numeric, None),
]


if __name__ == "__main__":
    failures = 0
    for number, title, fn, budget in CHECKS:
        try:
            with criterion(number, title, budget):
                fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"      {type(exc).__name__}: {exc}")
    sys.exit(1 if failures else 0)
