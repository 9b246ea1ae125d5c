import random

import pytest
from hypothesis import given, settings, strategies as st

from morsepolar.errors import InconsistentStrataError
from morsepolar.stratcalc import (Stratum, StratumData, StratumPoset, closed_form_nv,
                                  microlocal_multiplicities, morse_count_formula, mu_from_defect,
                                  reassemble_mu, siersma_identity_check, solve_nv)


def _point(n, mu):
    P = StratumPoset([Stratum("P", 0, True, 0), Stratum("S", n, False)], [("P", "S")], n)
    return P, StratumData({"P": mu}, chi_minus_h={"P": 1})


def test_single_point_sign():
    for n in range(1, 5):
        P, D = _point(n, 7)
        assert solve_nv(P, D, strict=False).n["P"] == (-1) ** (n - 1) * 7


def test_two_strata_example():
    P = StratumPoset([Stratum("V", 0, True, 0), Stratum("S", 1, True, 0), Stratum("T", 2, False)],
                     [("V", "S"), ("S", "T")], 2)
    D = StratumData({"V": -3, "S": 1}, clk_chi={("V", "S"): 2})
    assert closed_form_nv(P, D)["V"] == 5
    assert solve_nv(P, D).n["V"] == 5


def test_smooth_milnor_reduction():
    P, D = _point(2, -4)
    assert solve_nv(P, D).n["P"] == 4
    assert morse_count_formula(P, D) == 4


def test_microlocal_examples():
    P = StratumPoset([Stratum("V", 0), Stratum("S", 1)], [("V", "S")], 1)
    assert microlocal_multiplicities(P, {"V": 5}, {}) == {"V": 5}
    c = microlocal_multiplicities(P, {"V": 1, "S": 1}, {("V", "S"): -1})
    assert c["V"] == 2
    assert microlocal_multiplicities(P, {"V": 0, "S": 0}, {("V", "S"): 3}) == {"V": 0, "S": 0}


def test_defect_examples():
    P = StratumPoset([Stratum("V", 0), Stratum("S", 2, False)], [("V", "S")], 2)
    D = StratumData({}, eu={"S": 1})
    assert mu_from_defect(P, D, {("V", "S"): (0, 0)}) == {"V": 0}
    assert mu_from_defect(P, D, {("V", "S"): (-3, 1)}) == {"V": -4}


def test_cardioid_morse_count():
    P = StratumPoset([Stratum("O", 0, True, 0), Stratum("P", 0, True, 4), Stratum("S", 1, False)],
                     [("O", "S"), ("P", "S")], 1)
    D = StratumData({"O": 2, "P": 1}, chi_minus_h={"O": 1, "P": 1})
    assert solve_nv(P, D).n == {"O": 2, "P": 1}
    assert morse_count_formula(P, D) == 3
    assert morse_count_formula(P, StratumData({"O": 0, "P": 0}, chi_minus_h={"O": 1, "P": 1}), 2) == 2


def test_siersma_examples():
    assert siersma_identity_check(2, 0, 3)[0] == 3
    assert siersma_identity_check(3, -2, 0)[0] == 0


@pytest.mark.parametrize("strata, closure", [
    ([Stratum("A", 0), Stratum("A", 1)], []),
    ([Stratum("A", 3)], []),
    ([Stratum("A", 0)], [("A", "B")]),
    ([Stratum("A", 0)], [("A", "A")]),
    ([Stratum("A", 1), Stratum("B", 1)], [("A", "B")]),
])
def test_poset_validation(strata, closure):
    with pytest.raises(InconsistentStrataError):
        StratumPoset(strata, closure, 2)


def test_negative_multiplicities():
    P, D = _point(2, 3)
    with pytest.raises(InconsistentStrataError):
        solve_nv(P, D)
    assert solve_nv(P, D, strict=False).negative == ["P"]


def test_missing_data():
    P, _ = _point(2, 1)
    with pytest.raises(InconsistentStrataError):
        solve_nv(P, StratumData({}))


def test_transitive_closure():
    P = StratumPoset([Stratum("A", 0), Stratum("B", 1), Stratum("C", 2)], [("A", "B"), ("B", "C")], 2)
    assert P.above("A") == {"B", "C"}


# random posets

def random_instance(rng: random.Random, max_strata: int = 6):
    n = rng.randint(1, 4)
    k = rng.randint(1, max_strata)
    strata = []
    for i in range(k):
        strata.append(Stratum(f"s{i}", rng.randint(0, n), True, rng.choice([0, 1])))
    pairs = [(a.id, b.id) for a in strata for b in strata
             if a.dim < b.dim and rng.random() < 0.6]
    P = StratumPoset(strata, pairs, n)
    mu = {s.id: rng.randint(-9, 9) for s in strata}
    clk = {(v, s): rng.randint(-4, 4) for v in P.strata for s in P.above(v)}
    return P, StratumData(mu, clk_chi=clk)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    P, D = random_instance(random.Random(seed))
    res = solve_nv(P, D, strict=False)
    assert res.reassembled_mu == {v: D.mu[v] for v in P.singular_ids()}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_paths_agree_property(seed):
    P, D = random_instance(random.Random(seed))
    assert solve_nv(P, D, strict=False).n == closed_form_nv(P, D)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(-50, 50), st.integers(0, 60))
def test_siersma_property(n, chi, k):
    assert siersma_identity_check(n, chi, k)[0] == k


def test_reassemble_inverts_closed_form():
    rng = random.Random(5)
    for _ in range(50):
        P, D = random_instance(rng)
        assert reassemble_mu(P, D, closed_form_nv(P, D)) == {v: D.mu[v] for v in P.singular_ids()}
