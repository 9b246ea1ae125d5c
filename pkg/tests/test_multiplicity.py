from fractions import Fraction

import pytest

from morsepolar.errors import NonIsolatedError
from morsepolar.geometry import PolarCurve, VarietySpec, generic_polar_curve, polar_curve_ideal
from morsepolar.ideals import ideal
from morsepolar.multiplicity import (fibre_points, local_intersection_multiplicity,
                                     milnor_number_oracle, n_p_polar, polar_multiplicities,
                                     resultant_order_bivariate)
from morsepolar.polycore import LinearForm

from conftest import poly

O, P = (Fraction(0), Fraction(0)), (Fraction(-2), Fraction(0))


@pytest.fixture(scope="module")
def cardioid_polar(cardioid, R2):
    f = poly("x^2 + y^2", R2)
    G, _, _ = generic_polar_curve(cardioid, f, 1)
    return G, f


def _curve(text, R2):
    return PolarCurve(ideal([poly(text, R2)]), LinearForm((1, 1)), None)


def test_cardioid_local_multiplicities(cardioid_polar, R2):
    G, f = cardioid_polar
    l = G.linear_form.to_polynomial(R2)
    others = [[0, 0], [-2, 0]]
    assert local_intersection_multiplicity(G, f, O, 1, others=others).value == 4
    assert local_intersection_multiplicity(G, l, O, 2, others=others).value == 2
    assert local_intersection_multiplicity(G, f, P, 1, others=others).value == 2
    assert local_intersection_multiplicity(G, l, P, 2, others=others).value == 1


def test_cardioid_polar_formula(cardioid_polar):
    G, f = cardioid_polar
    others = [[0, 0], [-2, 0]]
    pm = polar_multiplicities(G, f, G.linear_form, O, 1, others=others)
    assert (pm.mult_f, pm.mult_l, pm.n_p) == (4, 2, 2)
    assert n_p_polar(G, f, G.linear_form, P, 1, others=others) == 1


def test_crossing_planes_has_no_polar_contribution(crossing_planes, R3):
    f = poly("x + 2*y + z^2", R3)
    G = polar_curve_ideal(crossing_planes, f, LinearForm((0, 0, 1)))
    assert n_p_polar(G, f, G.linear_form, (0, 0, 0)) == 0


def test_resultant_order_examples(cardioid_polar, R2):
    G, f = cardioid_polar
    assert resultant_order_bivariate(G, f, O, 1) == 4
    assert resultant_order_bivariate(_curve("x", R2), poly("y", R2), O) == 1
    assert resultant_order_bivariate(_curve("y - x^2", R2), poly("y", R2), O) == 2


@pytest.mark.parametrize("curve, g, expected", [
    ("x", "y", 1), ("y - x^2", "y", 2), ("y^2 - x^3", "x", 2), ("y^2 - x^3", "y", 3),
    ("x*y*(x - y)", "x + 2*y", 3),
])
def test_numeric_matches_resultant_small_curves(R2, curve, g, expected):
    G = _curve(curve, R2)
    gg = poly(g, R2)
    assert resultant_order_bivariate(G, gg, O) == expected
    assert local_intersection_multiplicity(G, gg, O).value == expected


def test_neighbouring_fibre_points_are_excluded(R2):
    # the line y = x/100 meets y = x^2 at 0 and at x = 1/100, which sits inside the default ball
    G = _curve("y - x^2", R2)
    g = poly("y - x/100", R2)
    assert len(fibre_points(G, g, O)) == 2
    assert local_intersection_multiplicity(G, g, O).value == 1


@pytest.mark.parametrize("f, mu", [("x^2 + y^2", 1), ("x^3 + y^3", 4), ("x^3 - y^2", 2),
                                   ("x^2*y + y^4", 5), ("x^4 + y^5 + x^2*y^2", 10)])
def test_milnor_oracle(R2, f, mu):
    assert milnor_number_oracle(poly(f, R2), O) == mu


def test_milnor_oracle_at_shifted_point(R2):
    # x^3 - 3x has Morse points at x = +-1; y^2 adds a Morse direction
    assert milnor_number_oracle(poly("x^3 - 3*x + y^2", R2), (1, 0)) == 1
    assert milnor_number_oracle(poly("x^3 - 3*x + y^2", R2), (0, 0)) == 0


def test_milnor_oracle_rejects_non_isolated(R2):
    with pytest.raises(NonIsolatedError):
        milnor_number_oracle(poly("x^2", R2), O)


@pytest.mark.parametrize("f", ["x^3 + y^3", "x^3 - y^2", "x^2*y + y^4", "x^2*y^2 + x^5 + y^5"])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_smooth_bridge_across_seeds(plane, R2, f, seed):
    f = poly(f, R2)
    G, _, _ = generic_polar_curve(plane, f, seed)
    lp = G.linear_form.to_polynomial(R2)
    pm = polar_multiplicities(G, f, G.linear_form, O, seed)
    assert pm.mult_f == resultant_order_bivariate(G, f, O, seed)
    assert pm.mult_l == resultant_order_bivariate(G, lp, O, seed)
    assert pm.n_p == milnor_number_oracle(f, O, seed)
