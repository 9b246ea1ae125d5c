"""Exact multivariate polynomials over Q.

Polynomials are immutable maps from exponent tuples to ``Fraction``
coefficients, tied to a :class:`Ring` (an ordered tuple of variable names).
Floating point only appears at the evaluation boundary.

Expression grammar accepted by :func:`parse_polynomial`::

    expr    := ["+" | "-"] term (("+" | "-") term)*
    term    := factor ("*" factor)*
    factor  := primary ["^" INT]
    primary := NUMBER | NAME | "(" expr ")" | "-" factor
    NUMBER  := INT ["/" INT]

There is no implicit multiplication: ``2x`` is a syntax error.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PolynomialSyntaxError

ZERO_DEGREE = -1
"""Degree reported for the zero polynomial."""

COEFF_BOX = 10**6
MAX_COEFF_SPREAD = 20


@dataclass(frozen=True)
class Ring:
    """Ordered list of variable names for Q[x_1..x_N]."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def gens(self) -> list["Polynomial"]:
        return [Polynomial.variable(self, i) for i in range(self.nvars)]

    def extend(self, new_names: Sequence[str], front: bool = True) -> "Ring":
        new_names = tuple(new_names)
        return Ring(new_names + self.names if front else self.names + new_names)

    def __repr__(self):
        return f"Ring({', '.join(self.names)})"


def grevlex_key(e: tuple[int, ...]):
    return (sum(e), tuple(-a for a in reversed(e)))


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("ring", "terms", "__dict__")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], object] | None = None):
        n = ring.nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(a) for a in e)
            if len(e) != n or any(a < 0 for a in e):
                raise ValueError(f"bad exponent vector {e} for {ring}")
            c = _coerce(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def _raw(cls, ring: Ring, terms: dict) -> "Polynomial":
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        object.__setattr__(p, "ring", ring)
        object.__setattr__(p, "terms", terms)
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring: Ring) -> "Polynomial":
        return cls._raw(ring, {})

    @classmethod
    def constant(cls, ring: Ring, c) -> "Polynomial":
        c = _coerce(c)
        return cls._raw(ring, {(0,) * ring.nvars: c} if c else {})

    @classmethod
    def variable(cls, ring: Ring, i: int) -> "Polynomial":
        e = [0] * ring.nvars
        e[i] = 1
        return cls._raw(ring, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, ring: Ring, exps: Sequence[int], c=1) -> "Polynomial":
        return cls(ring, {tuple(exps): c})

    # -- basic properties --------------------------------------------------
    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @property
    def nvars(self) -> int:
        return self.ring.nvars

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    @cached_property
    def degree(self) -> int:
        if not self.terms:
            return ZERO_DEGREE
        return max(sum(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending graded reverse lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def variables_used(self) -> set[int]:
        return {i for e in self.terms for i, a in enumerate(e) if a}

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        return Polynomial.constant(self.ring, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Polynomial._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = _coerce(other)
            if not c:
                return Polynomial.zero(self.ring)
            return Polynomial._raw(self.ring, {e: c * v for e, v in self.terms.items()})
        other = self._lift(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.ring, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _coerce(other)
        return self * (1 / c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(self.ring, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Polynomial.constant(self.ring, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- calculus and evaluation --------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.ring}")
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return Polynomial._raw(self.ring, out)

    def __call__(self, point):
        return evaluate(self, point)

    def eval_exact(self, point: Sequence) -> Fraction:
        """Exact evaluation at a rational point."""
        if len(point) != self.nvars:
            raise ValueError("dimension mismatch")
        pt = [Fraction(v) for v in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for v, a in zip(pt, e):
                if a:
                    term *= v**a
            total += term
        return total

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Replace variable i by ``images[i]`` (all in one common ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].ring if images else self.ring
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i, a):
            if (i, a) not in cache:
                cache[(i, a)] = images[i] ** a
            return cache[(i, a)]

        out = Polynomial.zero(target)
        for e, c in self.terms.items():
            term = Polynomial.constant(target, c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
            out = out + term
        return out

    def embed(self, ring: Ring) -> "Polynomial":
        """Re-express in a ring containing all variables this polynomial uses."""
        pos = []
        for i, name in enumerate(self.ring.names):
            if name in ring.names:
                pos.append(ring.index(name))
            else:
                pos.append(None)
        out = {}
        for e, c in self.terms.items():
            new = [0] * ring.nvars
            for i, a in enumerate(e):
                if a:
                    if pos[i] is None:
                        raise ValueError(f"variable {self.ring.names[i]} not in {ring}")
                    new[pos[i]] = a
            out[tuple(new)] = c
        return Polynomial._raw(ring, out)

    def primitive(self) -> "Polynomial":
        """Scale to coprime integer coefficients with positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm

        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for v in nums:
            g = gcd(g, v)
        lead = self.sorted_terms()[0][1]
        scale = Fraction(den, g) * (1 if lead > 0 else -1)
        return self * scale

    def coefficient_bound(self) -> float:
        return float(max((abs(c) for c in self.terms.values()), default=0))

    # -- printing -----------------------------------------------------------
    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Polynomial({to_string(self)!r}, {self.ring!r})"


# ---------------------------------------------------------------------------
# printing and parsing
# ---------------------------------------------------------------------------

def _monomial_str(names, e) -> str:
    parts = []
    for name, a in zip(names, e):
        if a == 1:
            parts.append(name)
        elif a > 1:
            parts.append(f"{name}^{a}")
    return "*".join(parts)


def to_string(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    out = []
    for k, (e, c) in enumerate(p.sorted_terms()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        mono = _monomial_str(p.ring.names, e)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if k == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*^/()":
                raise PolynomialSyntaxError(f"unexpected character {ch!r}", start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, ring: Ring):
        self.ring = ring
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            got = tok[1] or "end of input"
            raise PolynomialSyntaxError(f"expected {value!r}, got {got!r}", tok[2])
        return tok

    def parse(self) -> Polynomial:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolynomialSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self):
        tok = self.peek()
        negate = False
        if tok[1] in "+-" and tok[0] == "op":
            self.take()
            negate = tok[1] == "-"
        acc = self.term()
        if negate:
            acc = -acc
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if tok[1] == "+" else acc - rhs
            else:
                return acc

    def term(self):
        acc = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()
            rhs = self.factor()
            if op[1] == "*":
                acc = acc * rhs
            elif not rhs.is_constant() or rhs.is_zero():
                raise PolynomialSyntaxError("can only divide by a nonzero number", op[2])
            else:
                acc = acc / rhs.constant_term()
        tok = self.peek()
        if tok[0] in ("int", "name") or tok[1] == "(":
            raise PolynomialSyntaxError("implicit multiplication is not allowed; use '*'", tok[2])
        return acc

    def factor(self):
        base = self.primary()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", tok[2])
            base = base ** int(tok[1])
        return base

    def primary(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            c = Fraction(int(value))
            if self.peek()[1] == "/":
                self.take()
                den = self.take()
                if den[0] != "int":
                    raise PolynomialSyntaxError("rational literal needs an integer denominator", den[2])
                if int(den[1]) == 0:
                    raise PolynomialSyntaxError("zero denominator", den[2])
                c = Fraction(int(value), int(den[1]))
            return Polynomial.constant(self.ring, c)
        if kind == "name":
            if value not in self.ring.names:
                raise PolynomialSyntaxError(f"unknown variable {value!r}", pos)
            return Polynomial.variable(self.ring, self.ring.index(value))
        if value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if value == "-":
            return -self.factor()
        raise PolynomialSyntaxError(f"unexpected token {value or 'end of input'!r}", pos)


def parse_polynomial(text: str, ring: Ring | Sequence[str]) -> Polynomial:
    """Parse ``text`` into a canonical polynomial over ``ring``.

    >>> R = Ring(("x", "y"))
    >>> str(parse_polynomial("(x+y)^2 - 2*x*y", R))
    'x^2 + y^2'
    """
    if not isinstance(ring, Ring):
        ring = Ring(tuple(ring))
    return _Parser(text, ring).parse()


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def differentiate(p: Polynomial, var_index: int) -> Polynomial:
    return p.diff(var_index)


def evaluate(p: Polynomial, pt: Sequence[complex]) -> complex:
    """Evaluate at a complex point in double precision."""
    if len(pt) != p.nvars:
        raise ValueError(f"point has {len(pt)} coordinates, ring has {p.nvars}")
    x = [complex(v) for v in pt]
    powers: dict[tuple[int, int], complex] = {}
    total = 0j
    for e, c in p.terms.items():
        term = complex(c)
        for i, a in enumerate(e):
            if a:
                key = (i, a)
                if key not in powers:
                    powers[key] = x[i] ** a
                term *= powers[key]
        total += term
    return total


def jacobian_matrix(polys: Sequence[Polynomial]) -> list[list[Polynomial]]:
    if not polys:
        raise ValueError("need at least one polynomial")
    ring = polys[0].ring
    if any(p.ring != ring for p in polys):
        raise ValueError("polynomials live in different rings")
    return [[p.diff(i) for i in range(ring.nvars)] for p in polys]


@dataclass(frozen=True)
class LinearForm:
    """Homogeneous linear form sum_i a_i x_i with exact coefficients."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        if not any(coeffs):
            raise ValueError("linear form must not vanish identically")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def nvars(self) -> int:
        return len(self.coefficients)

    def to_polynomial(self, ring: Ring) -> Polynomial:
        if ring.nvars != self.nvars:
            raise ValueError("linear form and ring disagree on dimension")
        out = {}
        for i, c in enumerate(self.coefficients):
            if c:
                e = [0] * ring.nvars
                e[i] = 1
                out[tuple(e)] = c
        return Polynomial._raw(ring, out)

    def unit_vector(self) -> np.ndarray:
        v = np.array([float(c) for c in self.coefficients], dtype=np.complex128)
        return v / np.linalg.norm(v)

    def normalized(self, ring: Ring) -> Polynomial:
        """Same hyperplane family, rescaled so the largest coefficient is +-1."""
        big = max(abs(c) for c in self.coefficients)
        return self.to_polynomial(ring) * (1 / big)


def sample_generic_linear(N: int, seed: int) -> LinearForm:
    """Random integer linear form with coefficients in [-10^6, 10^6].

    Forms with a zero coefficient, or with one coefficient more than
    ``MAX_COEFF_SPREAD`` times smaller than the largest, are redrawn: they are
    generic in theory but squeeze the polar curve toward a coordinate axis,
    which pushes nearby intersection points below floating-point resolution.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(seed)
    while True:
        coeffs = rng.integers(-COEFF_BOX, COEFF_BOX + 1, size=N)
        if N == 1:
            if coeffs[0] != 0:
                break
        elif np.all(coeffs != 0):
            mags = np.abs(coeffs)
            if mags.max() <= MAX_COEFF_SPREAD * mags.min():
                break
    return LinearForm(tuple(Fraction(int(c)) for c in coeffs))


# ---------------------------------------------------------------------------
# array form for numeric kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledBlock:
    """Flattened term arrays of a polynomial list, equation-major.

    ``starts[k]:starts[k+1]`` indexes the terms of equation ``k``.
    """

    exps: np.ndarray     # (T, n) int64
    coefs: np.ndarray    # (T,) complex128
    starts: np.ndarray   # (m + 1,) int64
    nvars: int

    @property
    def neqs(self) -> int:
        return len(self.starts) - 1

    @property
    def max_degree(self) -> int:
        return int(self.exps.max()) if self.exps.size else 0


def compile_polys(polys: Sequence[Polynomial], nvars: int | None = None,
                  scales: Iterable[complex] | None = None) -> CompiledBlock:
    n = polys[0].nvars if nvars is None else nvars
    scales = list(scales) if scales is not None else [1.0] * len(polys)
    rows, coefs, starts = [], [], [0]
    for p, s in zip(polys, scales):
        for e, c in p.terms.items():
            rows.append(e)
            coefs.append(complex(c) * s)
        starts.append(len(rows))
    exps = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    return CompiledBlock(exps, np.array(coefs, dtype=np.complex128),
                         np.array(starts, dtype=np.int64), n)
