from fractions import Fraction
from pathlib import Path

import pytest

from morsepolar.geometry import VarietySpec
from morsepolar.polycore import Ring, parse_polynomial

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"
CARDIOID = "(x^2 + y^2 + x)^2 - (x^2 + y^2)"


@pytest.fixture(scope="session")
def R2():
    return Ring(("x", "y"))


@pytest.fixture(scope="session")
def R3():
    return Ring(("x", "y", "z"))


@pytest.fixture(scope="session")
def cardioid(R2):
    return VarietySpec.from_polys([parse_polynomial(CARDIOID, R2)], R2)


@pytest.fixture(scope="session")
def plane(R2):
    return VarietySpec.affine_space(R2)


@pytest.fixture(scope="session")
def crossing_planes(R3):
    return VarietySpec.from_polys([parse_polynomial("x^2 - y^2", R3)], R3)


def poly(text, ring):
    return parse_polynomial(text, ring)


def origin(n):
    return tuple(Fraction(0) for _ in range(n))
