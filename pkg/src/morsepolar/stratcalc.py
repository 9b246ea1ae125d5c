"""Exact bookkeeping over a stratification poset.

Inputs are integers supplied by the user (defects mu_V, Euler characteristics
of complex links, Euler obstructions); nothing here looks at equations.  The
sign conventions follow the constructible-function calculus:

* codim V is taken inside X, so (-1)^(codim V - 1) = (-1)^(dim X - 1) for points;
* mu_V is the vanishing-cycle value Phi_{f-c}(Eu_X) on V, so on smooth X an
  isolated critical point of Milnor number m has mu_V = (-1)^(dim X - 1) * m.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InconsistentStrataError


@dataclass(frozen=True)
class Stratum:
    id: str
    dim: int
    singular: bool = True
    critical_value: Fraction | None = None


class StratumPoset:
    """Strata of X with the closure order  V < S  iff  V lies in closure(S) minus S.

    The pairs given are closed under transitivity; the poset is validated
    on construction.
    """

    def __init__(self, strata: Iterable[Stratum], closure: Iterable[tuple[str, str]],
                 ambient_dim: int):
        strata = list(strata)
        self.strata = {s.id: s for s in strata}
        self.ambient_dim = int(ambient_dim)
        if len(self.strata) != len(strata):
            raise InconsistentStrataError("duplicate stratum ids")
        for s in self.strata.values():
            if not 0 <= s.dim <= self.ambient_dim:
                raise InconsistentStrataError(
                    f"stratum {s.id} has dimension {s.dim} outside 0..{self.ambient_dim}")
        below: dict[str, set[str]] = {i: set() for i in self.strata}
        for v, s in closure:
            if v not in self.strata or s not in self.strata:
                raise InconsistentStrataError(f"closure pair ({v}, {s}) names an unknown stratum")
            if v == s:
                raise InconsistentStrataError(f"stratum {v} cannot lie in its own boundary")
            if self.strata[v].dim >= self.strata[s].dim:
                raise InconsistentStrataError(
                    f"closure pair {v} < {s} needs dim {v} < dim {s}")
            below[v].add(s)
        # transitive closure; dimension monotonicity rules out cycles
        changed = True
        while changed:
            changed = False
            for v in below:
                extra = set().union(set(), *(below[s] for s in below[v])) - below[v]
                if extra:
                    below[v] |= extra
                    changed = True
        self._above = {v: frozenset(ss) for v, ss in below.items()}

    def above(self, v: str) -> frozenset[str]:
        """Strata S with v < S."""
        return self._above[v]

    def codim(self, v: str) -> int:
        return self.ambient_dim - self.strata[v].dim

    def singular_ids(self) -> list[str]:
        return [i for i, s in self.strata.items() if s.singular]

    def groups(self) -> dict[Fraction | None, list[str]]:
        """Singular strata grouped by critical value (the sets Sigma_c)."""
        out: dict = {}
        for i in self.singular_ids():
            out.setdefault(self.strata[i].critical_value, []).append(i)
        return out

    def top_down(self, ids: Iterable[str]) -> list[str]:
        """A linear extension of the order, larger strata first."""
        return sorted(ids, key=lambda i: (-self.strata[i].dim, i))


@dataclass
class StratumData:
    mu: Mapping[str, int]
    clk_chi: Mapping[tuple[str, str], int] = field(default_factory=dict)
    chi_minus_h: Mapping[str, int] = field(default_factory=dict)
    eu: Mapping[str, int] = field(default_factory=dict)


@dataclass
class NVResult:
    n: dict[str, int]
    reassembled_mu: dict[str, int]
    negative: list[str]


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _group_pairs(P: StratumPoset, group: list[str]):
    members = set(group)
    for v in group:
        for s in P.above(v):
            if s in members:
                yield v, s


def _clk(D: StratumData, v: str, s: str) -> int:
    try:
        return int(D.clk_chi[(v, s)])
    except KeyError:
        raise InconsistentStrataError(f"missing complex-link Euler characteristic for ({v}, {s})") from None


def microlocal_multiplicities(P: StratumPoset, phi: Mapping[str, int],
                              clk_chi: Mapping[tuple[str, str], int]) -> dict[str, int]:
    """c_V(phi) = sum over V <= S in the support of e_{V,S} phi(S).

    e_{V,V} = (-1)^dim V and e_{V,S} = -(-1)^dim V * chi_c(Clk_S(V)).  The
    minus sign is the one that reproduces the closed formula for n_V (and
    the characteristic cycle of the constant function on a nodal curve).
    """
    out = {}
    support = set(phi)
    for v in phi:
        sv = _sign(P.strata[v].dim)
        total = sv * int(phi[v])
        for s in P.above(v):
            if s in support:
                if (v, s) not in clk_chi:
                    raise InconsistentStrataError(
                        f"missing complex-link Euler characteristic for ({v}, {s})")
                total -= sv * int(clk_chi[(v, s)]) * int(phi[s])
        out[v] = total
    return out


def _mu_of(D: StratumData, v: str) -> int:
    try:
        return int(D.mu[v])
    except KeyError:
        raise InconsistentStrataError(f"missing mu for singular stratum {v}") from None


def solve_nv(P: StratumPoset, D: StratumData, strict: bool = True) -> NVResult:
    """Multiplicities n_V of the singular strata, group by group.

    Computed through the microlocal multiplicities of
    phi = (-1)^(dim X - 1) * mu on each Sigma_c.  ``reassembled_mu`` inverts
    the triangular system again for auditing.  Negative n_V are reported,
    and raise when ``strict``.
    """
    n: dict[str, int] = {}
    for _, group in P.groups().items():
        phi = {v: _sign(P.ambient_dim - 1) * _mu_of(D, v) for v in group}
        clk = {pair: _clk(D, *pair) for pair in _group_pairs(P, group)}
        n.update(microlocal_multiplicities(P, phi, clk))
    negative = sorted(v for v, val in n.items() if val < 0)
    if negative and strict:
        raise InconsistentStrataError(f"negative multiplicities on strata {negative}")
    return NVResult(n, reassemble_mu(P, D, n), negative)


def closed_form_nv(P: StratumPoset, D: StratumData) -> dict[str, int]:
    """n_V = (-1)^(codim V - 1) * (mu_V - sum_S chi_c(Clk_S(V)) * mu_S)."""
    n = {}
    for _, group in P.groups().items():
        members = set(group)
        for v in group:
            acc = _mu_of(D, v)
            for s in P.above(v):
                if s in members:
                    acc -= _clk(D, v, s) * _mu_of(D, s)
            n[v] = _sign(P.codim(v) - 1) * acc
    return n


def reassemble_mu(P: StratumPoset, D: StratumData, n: Mapping[str, int]) -> dict[str, int]:
    """Back-substitute mu_V = (-1)^(codim V - 1) n_V + sum_S chi_c mu_S, largest strata first."""
    mu: dict[str, int] = {}
    for _, group in P.groups().items():
        members = set(group)
        for v in P.top_down(group):
            acc = _sign(P.codim(v) - 1) * int(n[v])
            for s in P.above(v):
                if s in members:
                    acc += _clk(D, v, s) * mu[s]
            mu[v] = acc
    return mu


def morse_count_formula(P: StratumPoset, D: StratumData, m_infinity: int = 0) -> int:
    """m_inf + (-1)^(dim X - 1) * sum over singular V of chi(V minus H) * mu_V."""
    total = 0
    for v in P.singular_ids():
        if v not in D.chi_minus_h:
            raise InconsistentStrataError(f"missing chi(V minus H) for stratum {v}")
        total += int(D.chi_minus_h[v]) * _mu_of(D, v)
    return int(m_infinity) + _sign(P.ambient_dim - 1) * total


def mu_from_defect(P: StratumPoset, D: StratumData,
                   nearby_chis: Mapping[tuple[str, str], tuple[int, int]]) -> dict[str, int]:
    """mu_V = sum over V < S of [chi(f-fiber in S) - chi(l-slice in S)] * Eu_X(S)."""
    out = {}
    for v in P.singular_ids():
        acc = 0
        for s in sorted(P.above(v)):
            if (v, s) not in nearby_chis:
                raise InconsistentStrataError(f"missing local Euler characteristics for ({v}, {s})")
            if s not in D.eu:
                raise InconsistentStrataError(f"missing Euler obstruction value on {s}")
            chi_f, chi_l = nearby_chis[(v, s)]
            acc += (int(chi_f) - int(chi_l)) * int(D.eu[s])
        out[v] = acc
    return out


def siersma_identity_check(n: int, clk_reduced_chi: int, k: int) -> tuple[int, dict[str, int]]:
    """n_0 for an isolated singularity of both X and f at the origin.

    Phi_f(1_X)(0) = reduced chi(Clk) + (-1)^(n-1) k, alpha(0) = chi(Clk) - 1,
    Phi_f(alpha)(0) = -alpha(0), n_0 = (-1)^(n-1) [Phi_f(1_X)(0) + Phi_f(alpha)(0)].
    """
    if n < 1:
        raise ValueError("dim X must be at least 1")
    s = _sign(n - 1)
    phi_one = clk_reduced_chi + s * k
    chi_clk = clk_reduced_chi + 1
    alpha0 = chi_clk - 1
    phi_alpha = -alpha0
    n0 = s * (phi_one + phi_alpha)
    audit = {"phi_f_one": phi_one, "chi_clk": chi_clk, "alpha0": alpha0,
             "phi_f_alpha": phi_alpha, "n0": n0}
    if n0 != k:
        raise AssertionError(f"substitution chain gave n_0 = {n0}, expected {k}")
    return n0, audit
