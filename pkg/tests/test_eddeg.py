from fractions import Fraction

import numpy as np
import pytest

from morsepolar.eddeg import (ASSERTED, ESCAPES, FAILED, OK, VERIFIED, EDProblem,
                              count_critical_points, distance_function, ed_degree_both,
                              ed_degree_generic, ed_degree_polar, ed_degree_tracking)
from morsepolar.errors import NonIsolatedError, ScopeError
from morsepolar.geometry import VarietySpec

from conftest import poly


def test_distance_function(R2):
    assert distance_function(VarietySpec.affine_space(R2), (1, Fraction(1, 2))) == \
        poly("(x - 1)^2 + (y - 1/2)^2", R2)


def test_cardioid_both_pipelines(cardioid):
    rep = ed_degree_both(EDProblem(cardioid, (0, 0), seed=1))
    assert rep.ed_degree == 3 and rep.m_infinity == 0
    assert rep.status == OK and rep.provenance == VERIFIED
    assert all(rep.agreement.values())
    got = {tuple(p.exact): p.n_p for p in rep.per_point}
    assert got == {(0, 0): 2, (-2, 0): 1}


def test_tracking_alone(cardioid):
    rep = ed_degree_tracking(EDProblem(cardioid, (0, 0), seed=2))
    assert rep.ed_degree == 3
    assert sorted(p.tracked for p in rep.per_point) == [1, 2]


@pytest.mark.parametrize("u", [(0, 0), (Fraction(3, 7), Fraction(-5, 2))])
def test_affine_plane_has_degree_one(plane, u):
    assert ed_degree_polar(EDProblem(plane, u, seed=0)).ed_degree == 1
    assert ed_degree_tracking(EDProblem(plane, u, seed=0)).ed_degree == 1


def test_escape_withholds_ed_degree(plane, R2):
    prob = EDProblem(plane, None, seed=1, function=poly("x + x^2*y", R2))
    rep = ed_degree_polar(prob)
    assert rep.ed_degree is None and rep.m_infinity == 2 and rep.status == ESCAPES
    asserted = ed_degree_polar(prob, assert_no_escape=True)
    assert asserted.status == FAILED
    track = ed_degree_tracking(prob)
    assert track.ed_degree is None and track.m_infinity == 2 and not track.per_point


def test_generic_data_point_gives_simple_points(cardioid, R2):
    u = (Fraction(3, 11), Fraction(-7, 13))
    rep = ed_degree_both(EDProblem(cardioid, u, seed=3))
    assert rep.ed_degree == 3
    assert all(p.n_p == 1 for p in rep.per_point)
    # the cusp of the cardioid stays a candidate but carries nothing
    assert [tuple(p.exact) for p in rep.null_points] == [(0, 0)]


def test_generic_degrees(cardioid, R2):
    circle = VarietySpec.from_polys([poly("x^2 + y^2 - 1", R2)], R2)
    parabola = VarietySpec.from_polys([poly("y - x^2", R2)], R2)
    assert ed_degree_generic(cardioid, 0) == 3
    assert ed_degree_generic(circle, 0) == 2
    assert ed_degree_generic(parabola, 0) == 3
    assert ed_degree_generic(VarietySpec.affine_space(R2), 0) == 1


def test_circle_against_brute_force_lagrange(R2):
    # {x^2 + y^2 - 1, (x - u1) y - (y - u2) x}: solve the pair by substituting the circle
    circle = VarietySpec.from_polys([poly("x^2 + y^2 - 1", R2)], R2)
    u = (Fraction(1, 3), Fraction(2, 7))
    # the normal-line condition u2 x - u1 y = 0 meets the circle twice
    xs = np.roots([float(u[0] ** 2 + u[1] ** 2), 0, -float(u[0] ** 2)])
    assert len(xs) == 2
    assert count_critical_points(circle, distance_function(circle, u), 0) == 2


def test_non_isolated_refused_by_polar(plane, R2):
    prob = EDProblem(plane, None, seed=0, function=poly("x^2", R2))
    with pytest.raises(NonIsolatedError):
        ed_degree_polar(prob)


def test_constant_distance_is_out_of_scope(R2):
    circle = VarietySpec.from_polys([poly("x^2 + y^2 - 1", R2)], R2)
    with pytest.raises(ScopeError):
        ed_degree_polar(EDProblem(circle, (0, 0), seed=0))
