from fractions import Fraction

import numpy as np
import pytest

from morsepolar.errors import ScopeError
from morsepolar.geometry import (VarietySpec, candidate_ideal, default_strata, generic_polar_curve,
                                 polar_curve_ideal, singular_locus_ideal, solve_zero_dimensional,
                                 stratified_critical_ideal)
from morsepolar.ideals import ideal, krull_dimension
from morsepolar.polycore import LinearForm

from conftest import CARDIOID, poly


def _exact_points(I, seed=0):
    c = solve_zero_dimensional(I, seed)
    return sorted(c.exact), c


def test_singular_loci(cardioid, crossing_planes, R2, R3):
    S = singular_locus_ideal(cardioid)
    assert krull_dimension(S) == 0
    assert all(g.eval_exact((0, 0)) == 0 for g in S.gb)
    Z = singular_locus_ideal(crossing_planes)
    # the z-axis, up to radical
    assert all(g.eval_exact((0, 0, 5)) == 0 for g in Z.gb)
    assert any(Z.contains(poly("x", R3) ** k) for k in range(1, 4))
    assert any(Z.contains(poly("y", R3) ** k) for k in range(1, 4))
    assert krull_dimension(Z) == 1
    circle = VarietySpec.from_polys([poly("x^2 + y^2 - 1", R2)], R2)
    assert singular_locus_ideal(circle).is_unit()


def test_default_strata(cardioid, crossing_planes):
    assert len(default_strata(cardioid)) == 1
    assert krull_dimension(default_strata(crossing_planes)[0]) == 1


def test_stratified_critical_points(cardioid, crossing_planes, plane, R2, R3):
    crit = stratified_critical_ideal(cardioid, poly("x^2 + y^2", R2))
    pts, _ = _exact_points(crit)
    assert pts == [(Fraction(-2), Fraction(0)), (Fraction(0), Fraction(0))]
    crit = stratified_critical_ideal(crossing_planes, poly("x + 2*y + z^2", R3))
    pts, _ = _exact_points(crit)
    assert pts == [(0, 0, 0)]
    crit = stratified_critical_ideal(plane, poly("x^2 + y^2", R2))
    assert set(crit.gb) == {poly("x", R2), poly("y", R2)}


def test_polar_curve_of_cardioid_is_the_curve(cardioid, R2):
    G, crit, cand = generic_polar_curve(cardioid, poly("x^2 + y^2", R2), seed=1)
    assert G.ideal.gb == ideal([poly(CARDIOID, R2)]).gb
    assert G.dimension == 1
    pts, cands = _exact_points(cand, 1)
    assert pts == [(-2, 0), (0, 0)]


def test_crossing_planes_polar_locus_empty(crossing_planes, R3):
    f = poly("x + 2*y + z^2", R3)
    G = polar_curve_ideal(crossing_planes, f, LinearForm((0, 0, 1)))
    assert G.is_empty()
    assert krull_dimension(G.ideal) == -1


def test_plane_polar_conic(plane, R2):
    f = poly("x^3 + y^3", R2)
    l = LinearForm((3, 5))
    G = polar_curve_ideal(plane, f, l)
    assert G.ideal.gb == ideal([poly("15*x^2 - 9*y^2", R2)]).gb
    crit = stratified_critical_ideal(plane, f)
    pts, _ = _exact_points(candidate_ideal(G, crit))
    assert pts == [(0, 0)]


def test_constant_function_is_out_of_scope(plane, R2):
    with pytest.raises(ScopeError):
        stratified_critical_ideal(plane, poly("7", R2))


def test_solver_keeps_close_points_apart(R2):
    I = ideal([poly("x^2 - 1/10000", R2), poly("y", R2)])
    pts = solve_zero_dimensional(I).points
    assert len(pts) == 2
    assert sorted(np.round([p[0].real for p in pts], 10)) == [-0.01, 0.01]
