"""Buchberger's algorithm and the ideal operations built on it.

Everything here is exact.  Saturation and elimination go through an
auxiliary variable and a block order, intersection through the usual
``t*I + (1-t)*J`` trick, so no syzygy machinery is needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import MissingGroebnerBasis, NotZeroDimensionalError, ResourceLimitError
from .polycore import Polynomial, Ring, grevlex_key

MAX_BASIS_SIZE = 5000
MAX_DEGREE = 60


@dataclass(frozen=True)
class MonomialOrder:
    """``grevlex``, ``lex`` or ``block``; a block order compares the first
    ``split`` variables by grevlex and breaks ties with grevlex on the rest."""

    kind: str = "grevlex"
    split: int = 0

    def __post_init__(self):
        if self.kind not in ("grevlex", "lex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    @property
    def key(self) -> Callable[[tuple[int, ...]], object]:
        if self.kind == "grevlex":
            return grevlex_key
        if self.kind == "lex":
            return lambda e: e
        k = self.split
        return lambda e: (grevlex_key(e[:k]), grevlex_key(e[k:]))


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


@dataclass(frozen=True)
class IdealBasis:
    ring: Ring
    generators: tuple[Polynomial, ...]
    groebner: tuple[Polynomial, ...] | None = None
    order: MonomialOrder | None = None
    _lms: tuple = field(default=None, repr=False, compare=False)

    @property
    def gb(self) -> tuple[Polynomial, ...]:
        if self.groebner is None:
            raise MissingGroebnerBasis("ideal has no Groebner basis; call buchberger first")
        return self.groebner

    def leading_monomials(self) -> list[tuple[int, ...]]:
        key = self.order.key
        return [max(g.terms, key=key) for g in self.gb]

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.gb)

    def is_zero_ideal(self) -> bool:
        return len(self.gb) == 0

    def contains(self, p: Polynomial) -> bool:
        return normal_form(p, self).is_zero()

    def __str__(self):
        gens = self.groebner if self.groebner is not None else self.generators
        return "<" + ", ".join(str(g) for g in gens) + ">"


# ---------------------------------------------------------------------------
# Buchberger
# ---------------------------------------------------------------------------

def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _reduce_terms(h: dict, basis: list, key, full: bool = True) -> dict:
    """Multivariate division of ``h`` by monic ``basis`` entries ``(lm, terms)``."""
    h = dict(h)
    rem = {}
    while h:
        lm = max(h, key=key)
        c = h[lm]
        for g_lm, g in basis:
            if _divides(g_lm, lm):
                q = tuple(x - y for x, y in zip(lm, g_lm))
                for e, gc in g.items():
                    e2 = tuple(x + y for x, y in zip(e, q))
                    v = h.get(e2, 0) - c * gc
                    if v:
                        h[e2] = v
                    else:
                        h.pop(e2, None)
                break
        else:
            if not full:
                return h
            rem[lm] = c
            del h[lm]
    return rem


def _monic(terms: dict, key) -> tuple[tuple[int, ...], dict]:
    lm = max(terms, key=key)
    inv = 1 / terms[lm]
    return lm, {e: c * inv for e, c in terms.items()}


def _spoly(a, b):
    (lm_a, ta), (lm_b, tb) = a, b
    lcm = _lcm(lm_a, lm_b)
    qa = tuple(x - y for x, y in zip(lcm, lm_a))
    qb = tuple(x - y for x, y in zip(lcm, lm_b))
    out = {}
    for e, c in ta.items():
        out[tuple(x + y for x, y in zip(e, qa))] = c
    for e, c in tb.items():
        e2 = tuple(x + y for x, y in zip(e, qb))
        v = out.get(e2, 0) - c
        if v:
            out[e2] = v
        else:
            out.pop(e2, None)
    return out


def _groebner_terms(gens: list[dict], key, max_size: int, max_degree: int, ring: Ring) -> list:
    basis: list = []
    pairs: set = set()

    def add(terms):
        lm, t = _monic(terms, key)
        if sum(lm) > max_degree:
            raise ResourceLimitError(
                f"Groebner basis element of degree {sum(lm)} exceeds cap {max_degree}",
                partial=[Polynomial._raw(ring, b[1]) for b in basis])
        basis.append((lm, t))
        if len(basis) > max_size:
            raise ResourceLimitError(
                f"Groebner basis grew past {max_size} elements",
                partial=[Polynomial._raw(ring, b[1]) for b in basis])
        k = len(basis) - 1
        for i in range(k):
            pairs.add((i, k))

    for g in gens:
        r = _reduce_terms(g, basis, key)
        if r:
            add(r)

    while pairs:
        i, j = min(pairs, key=lambda p: (key(_lcm(basis[p[0]][0], basis[p[1]][0])), p))
        pairs.discard((i, j))
        lm_i, lm_j = basis[i][0], basis[j][0]
        if all(not (x and y) for x, y in zip(lm_i, lm_j)):
            continue
        lcm = _lcm(lm_i, lm_j)
        chain = False
        for k, (lm_k, _) in enumerate(basis):
            if k in (i, j):
                continue
            if _divides(lm_k, lcm) and (min(i, k), max(i, k)) not in pairs \
                    and (min(j, k), max(j, k)) not in pairs:
                chain = True
                break
        if chain:
            continue
        r = _reduce_terms(_spoly(basis[i], basis[j]), basis, key)
        if r:
            add(r)
    return basis


def _interreduce(basis: list, key) -> list:
    basis = sorted(basis, key=lambda b: key(b[0]))
    minimal = []
    for lm, t in basis:
        if not any(_divides(m, lm) for m, _ in minimal):
            minimal.append((lm, t))
    reduced = []
    for k, (lm, t) in enumerate(minimal):
        others = [b for j, b in enumerate(minimal) if j != k]
        tail = {e: c for e, c in t.items() if e != lm}
        tail = _reduce_terms(tail, others, key)
        tail[lm] = Fraction(1)
        reduced.append((lm, tail))
    return sorted(reduced, key=lambda b: key(b[0]))


def buchberger(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX, *,
               max_size: int = MAX_BASIS_SIZE, max_degree: int = MAX_DEGREE) -> IdealBasis:
    """Reduced Groebner basis of the ideal generated by ``gens``.

    Pairs are selected by smallest lcm (normal strategy) with Buchberger's
    product and chain criteria.  The result is sorted by increasing leading
    monomial and every element is monic, so it is unique for the order.
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    ring = gens[0].ring
    if any(g.ring != ring for g in gens):
        raise ValueError("generators live in different rings")
    key = order.key
    nonzero = [dict(g.terms) for g in gens if not g.is_zero()]
    basis = _groebner_terms(nonzero, key, max_size, max_degree, ring)
    basis = _interreduce(basis, key)
    gb = tuple(Polynomial._raw(ring, t) for _, t in basis)
    return IdealBasis(ring, tuple(gens), gb, order)


def ideal(gens: Sequence[Polynomial], ring: Ring | None = None, order: MonomialOrder = GREVLEX) -> IdealBasis:
    """Ideal with its Groebner basis; an empty list gives the zero ideal."""
    gens = list(gens)
    if not gens:
        if ring is None:
            raise ValueError("ring required for the zero ideal")
        return IdealBasis(ring, (), (), order)
    return buchberger(gens, order)


def unit_ideal(ring: Ring) -> IdealBasis:
    one = Polynomial.constant(ring, 1)
    return IdealBasis(ring, (one,), (one,), GREVLEX)


def zero_ideal(ring: Ring) -> IdealBasis:
    return IdealBasis(ring, (), (), GREVLEX)


def _gens_of(I: IdealBasis) -> list[Polynomial]:
    gens = I.groebner if I.groebner is not None else I.generators
    return [g for g in gens if not g.is_zero()]


def normal_form(p: Polynomial, I: IdealBasis) -> Polynomial:
    """Remainder of ``p`` on division by the Groebner basis of ``I``."""
    if I.groebner is None:
        raise MissingGroebnerBasis("normal_form needs a Groebner basis")
    key = I.order.key
    basis = [(max(g.terms, key=key), g.terms) for g in I.groebner]
    return Polynomial._raw(p.ring, _reduce_terms(p.terms, basis, key))


def sum_ideals(*ideals: IdealBasis) -> IdealBasis:
    ring = ideals[0].ring
    gens = [g for I in ideals for g in _gens_of(I)]
    return ideal(gens, ring)


# ---------------------------------------------------------------------------
# elimination, saturation, intersection
# ---------------------------------------------------------------------------

def _eliminate_front(gens: list[Polynomial], k: int, target: Ring) -> list[Polynomial]:
    """Basis of <gens> intersected with the subring of all but the first k variables."""
    order = MonomialOrder("block", k)
    gb = buchberger(gens, order).gb
    out = []
    for g in gb:
        if all(not any(e[:k]) for e in g.terms):
            out.append(Polynomial._raw(target, {e[k:]: c for e, c in g.terms.items()}))
    return out


def eliminate(I: IdealBasis, keep: Sequence[str]) -> IdealBasis:
    """``I`` intersected with Q[keep].  The result lives in ``Ring(keep)``."""
    names = I.ring.names
    keep = [v for v in names if v in set(keep)]
    drop = [v for v in names if v not in keep]
    target = Ring(tuple(keep))
    gens = _gens_of(I)
    if not gens:
        return zero_ideal(target)
    if not drop:
        return ideal(gens, target)
    big = Ring(tuple(drop) + tuple(keep))
    moved = [g.embed(big) for g in gens]
    out = _eliminate_front(moved, len(drop), target)
    return ideal(out, target)


def _aux_name(ring: Ring, base: str) -> str:
    name = base
    while name in ring.names:
        name += "_"
    return name


def _saturate_by_element(gens: list[Polynomial], g: Polynomial, ring: Ring) -> list[Polynomial]:
    w = _aux_name(ring, "_w")
    big = ring.extend([w])
    W = Polynomial.variable(big, 0)
    moved = [p.embed(big) for p in gens]
    moved.append(1 - W * g.embed(big))
    return _eliminate_front(moved, 1, ring)


def intersect(I: IdealBasis, J: IdealBasis) -> IdealBasis:
    ring = I.ring
    gi, gj = _gens_of(I), _gens_of(J)
    if not gi or not gj:
        return zero_ideal(ring)
    if I.groebner is not None and I.is_unit():
        return J if J.groebner is not None else ideal(gj, ring)
    if J.groebner is not None and J.is_unit():
        return I if I.groebner is not None else ideal(gi, ring)
    t = _aux_name(ring, "_t")
    big = ring.extend([t])
    T = Polynomial.variable(big, 0)
    gens = [T * p.embed(big) for p in gi] + [(1 - T) * p.embed(big) for p in gj]
    return ideal(_eliminate_front(gens, 1, ring), ring)


def saturate(I: IdealBasis, J: IdealBasis) -> IdealBasis:
    """``I : J^infinity`` as the intersection of ``I : g^infinity`` over generators g of J."""
    if I.ring != J.ring:
        raise ValueError("saturate: ideals live in different rings")
    ring = I.ring
    gi = _gens_of(I)
    gj = _gens_of(J)
    if not gj:
        return unit_ideal(ring)
    if not gi:
        return zero_ideal(ring)
    result = None
    for g in gj:
        if g.is_constant():
            part = ideal(gi, ring)
        else:
            part = ideal(_saturate_by_element(gi, g, ring), ring)
        result = part if result is None else intersect(result, part)
        if result.is_zero_ideal():
            break
    return result


# ---------------------------------------------------------------------------
# dimension and the finite-dimensional quotient
# ---------------------------------------------------------------------------

def krull_dimension(I: IdealBasis) -> int:
    """Dimension of V(I); -1 for the unit ideal."""
    if I.groebner is None:
        raise MissingGroebnerBasis("krull_dimension needs a Groebner basis")
    n = I.ring.nvars
    lms = I.leading_monomials()
    if any(not any(m) for m in lms):
        return -1
    supports = [frozenset(i for i, a in enumerate(m) if a) for m in lms]
    for size in range(n, -1, -1):
        for subset in itertools.combinations(range(n), size):
            s = frozenset(subset)
            if not any(sup <= s for sup in supports):
                return size
    return 0


def standard_monomials(I: IdealBasis) -> list[tuple[int, ...]]:
    """Monomials outside the leading-term ideal, ascending in the order."""
    if krull_dimension(I) != 0:
        raise NotZeroDimensionalError("quotient ring is not finite dimensional")
    lms = I.leading_monomials()
    n = I.ring.nvars
    seen = {(0,) * n}
    frontier = [(0,) * n]
    while frontier:
        nxt = []
        for m in frontier:
            for i in range(n):
                e = list(m)
                e[i] += 1
                e = tuple(e)
                if e in seen or any(_divides(l, e) for l in lms):
                    continue
                seen.add(e)
                nxt.append(e)
        frontier = nxt
    return sorted(seen, key=I.order.key)


def quotient_dimension(I: IdealBasis) -> int:
    if I.is_unit():
        return 0
    return len(standard_monomials(I))


def multiplication_matrices(I: IdealBasis) -> tuple[list[tuple[int, ...]], list[np.ndarray]]:
    """Matrices of multiplication by each variable on Q[x]/I in the standard-monomial basis."""
    basis = standard_monomials(I)
    index = {m: k for k, m in enumerate(basis)}
    n = I.ring.nvars
    mats = []
    for i in range(n):
        M = np.zeros((len(basis), len(basis)), dtype=np.complex128)
        for j, m in enumerate(basis):
            e = list(m)
            e[i] += 1
            nf = normal_form(Polynomial._raw(I.ring, {tuple(e): Fraction(1)}), I)
            for mono, c in nf.terms.items():
                M[index[mono], j] = float(c)
        mats.append(M)
    return basis, mats


# ---------------------------------------------------------------------------
# determinantal ideals
# ---------------------------------------------------------------------------

def determinant(M: Sequence[Sequence[Polynomial]]) -> Polynomial:
    k = len(M)
    if k == 1:
        return M[0][0]
    total = None
    for j in range(k):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return Polynomial.zero(M[0][0].ring)
    return total


def minors(M: Sequence[Sequence[Polynomial]], r: int) -> list[Polynomial]:
    rows, cols = len(M), len(M[0]) if M else 0
    if r < 1 or r > min(rows, cols):
        raise ValueError(f"minor size {r} out of range for a {rows}x{cols} matrix")
    out = []
    for ri in itertools.combinations(range(rows), r):
        for ci in itertools.combinations(range(cols), r):
            d = determinant([[M[a][b] for b in ci] for a in ri])
            if not d.is_zero():
                out.append(d)
    return out


def minors_ideal(M: Sequence[Sequence[Polynomial]], r: int) -> IdealBasis:
    ring = M[0][0].ring
    return ideal(minors(M, r), ring)
