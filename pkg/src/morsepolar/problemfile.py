"""Problem files: a small line-based ``key: value`` format.

Blank lines and text after ``#`` are ignored.  Keys may repeat where noted.

    variables:   x, y                     names, in order (required)
    variety:     <polynomial>             repeatable; none means affine space
    stratum_ideal: <poly>, <poly>, ...    repeatable; closure of a lower stratum
    function:    <polynomial>             the function f
    data_point:  <rational>, ...          u, so that f = sum (x_i - u_i)^2
    linear_form: <rational>, ...          fixed l instead of a random one
    point:       <rational>, ...          repeatable; points for `multiplicity`
    seed:        <int>
    t0:          <complex>                e.g. 0.05+0.03j
    schedule_steps: <int>
    escape_radius:  <float>

Stratification data for `stratcalc`:

    ambient_dim: <int>                          dim X
    stratum:     <id>, dim=<int>[, singular=yes|no][, value=<rational>]
    closure:     <id> < <id>
    mu:          <id> = <int>
    clk_chi:     <id> < <id> = <int>
    chi_minus_h: <id> = <int>
    eu:          <id> = <int>
    nearby:      <id> < <id> = <int>, <int>     (chi of f-fiber, chi of l-slice)
    m_infinity:  <int>
    siersma:     n=<int>, clk_reduced_chi=<int>, k=<int>
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InconsistentStrataError, PolynomialSyntaxError
from .polycore import LinearForm, Polynomial, Ring, parse_polynomial
from .stratcalc import Stratum, StratumData, StratumPoset

SINGLE_KEYS = {"variables", "function", "data_point", "linear_form", "seed", "t0",
               "schedule_steps", "escape_radius", "ambient_dim", "m_infinity", "siersma"}
REPEAT_KEYS = {"variety", "stratum_ideal", "point", "stratum", "closure", "mu", "clk_chi",
               "chi_minus_h", "eu", "nearby"}
STRATCALC_KEYS = {"ambient_dim", "stratum", "closure", "mu", "clk_chi", "chi_minus_h", "eu",
                  "nearby", "m_infinity", "siersma"}


class ProblemFileError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ProblemFile:
    variables: tuple[str, ...] = ()
    variety: list[Polynomial] = field(default_factory=list)
    strata_ideals: list[list[Polynomial]] | None = None
    function: Polynomial | None = None
    data_point: tuple[Fraction, ...] | None = None
    linear_form: LinearForm | None = None
    points: list[tuple[Fraction, ...]] = field(default_factory=list)
    seed: int | None = None
    t0: complex | None = None
    schedule_steps: int | None = None
    escape_radius: float | None = None
    poset: StratumPoset | None = None
    strat_data: StratumData | None = None
    nearby: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)
    m_infinity: int | None = None
    siersma: dict[str, int] | None = None
    echo: dict[str, object] = field(default_factory=dict)

    @property
    def ring(self) -> Ring:
        return Ring(self.variables)

    @property
    def has_stratification(self) -> bool:
        return self.poset is not None or self.siersma is not None


def _rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"[-+]?\d+(/\d+)?", text):
        raise ValueError(f"not a rational number: {text!r}")
    return Fraction(text)


def _vector(text: str) -> tuple[Fraction, ...]:
    return tuple(_rational(p) for p in text.split(","))


def _split_top_level(text: str) -> list[str]:
    """Split on commas outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _pair(text: str) -> tuple[str, str]:
    m = re.fullmatch(r"\s*(\w+)\s*<\s*(\w+)\s*", text)
    if not m:
        raise ValueError(f"expected '<id> < <id>', got {text!r}")
    return m.group(1), m.group(2)


def _assign(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ValueError(f"expected '<lhs> = <value>', got {text!r}")
    lhs, rhs = text.rsplit("=", 1)
    return lhs.strip(), rhs.strip()


def _kv_list(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        k, v = _assign(part)
        out[k] = v
    return out


def read_lines(text: str) -> tuple[list[tuple[int, str, str]], list[str]]:
    entries, diags = [], []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            diags.append(f"line {lineno}: expected 'key: value'")
            continue
        key, value = (s.strip() for s in line.split(":", 1))
        if key not in SINGLE_KEYS | REPEAT_KEYS:
            diags.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in SINGLE_KEYS and key in seen:
            diags.append(f"line {lineno}: key {key!r} given twice")
            continue
        seen.add(key)
        entries.append((lineno, key, value))
    return entries, diags


def parse_problem(text: str) -> tuple[ProblemFile, list[str]]:
    """Parse and validate; returns the problem and a list of diagnostics."""
    entries, diags = read_lines(text)
    pf = ProblemFile()
    by_key: dict[str, list[tuple[int, str]]] = {}
    for lineno, key, value in entries:
        by_key.setdefault(key, []).append((lineno, value))
        if key in REPEAT_KEYS:
            pf.echo.setdefault(key, []).append(value)
        else:
            pf.echo[key] = value

    def each(key):
        return by_key.get(key, [])

    def guarded(lineno, fn):
        try:
            return fn()
        except PolynomialSyntaxError as exc:
            diags.append(f"line {lineno}: {exc}")
        except (ValueError, InconsistentStrataError) as exc:
            diags.append(f"line {lineno}: {exc}")
        return None

    if "variables" in by_key:
        lineno, value = by_key["variables"][0]
        names = tuple(v.strip() for v in value.split(","))
        if not all(re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n) for n in names):
            diags.append(f"line {lineno}: bad variable list {value!r}")
        elif len(set(names)) != len(names):
            diags.append(f"line {lineno}: repeated variable name")
        else:
            pf.variables = names
    elif not by_key.keys() <= STRATCALC_KEYS | {"seed"}:
        diags.append("line 1: missing 'variables'")

    if pf.variables:
        ring = pf.ring
        N = ring.nvars
        for lineno, value in each("variety"):
            p = guarded(lineno, lambda: parse_polynomial(value, ring))
            if p is not None:
                pf.variety.append(p)
        for lineno, value in each("stratum_ideal"):
            gens = guarded(lineno, lambda: [parse_polynomial(v, ring) for v in _split_top_level(value)])
            if gens is not None:
                pf.strata_ideals = (pf.strata_ideals or []) + [gens]
        for lineno, value in each("function"):
            pf.function = guarded(lineno, lambda: parse_polynomial(value, ring))
        for lineno, value in each("data_point"):
            u = guarded(lineno, lambda: _vector(value))
            if u is not None and len(u) != N:
                diags.append(f"line {lineno}: data point needs {N} coordinates")
            else:
                pf.data_point = u
        if "function" in by_key and "data_point" in by_key:
            diags.append(f"line {by_key['data_point'][0][0]}: give either 'function' or 'data_point'")
        for lineno, value in each("linear_form"):
            v = guarded(lineno, lambda: _vector(value))
            if v is not None:
                if len(v) != N:
                    diags.append(f"line {lineno}: linear form needs {N} coefficients")
                else:
                    pf.linear_form = guarded(lineno, lambda: LinearForm(v))
        for lineno, value in each("point"):
            v = guarded(lineno, lambda: _vector(value))
            if v is not None:
                if len(v) != N:
                    diags.append(f"line {lineno}: point needs {N} coordinates")
                else:
                    pf.points.append(v)

    kinds = {int: "an integer", float: "a number", complex: "a complex number"}
    for key, conv in (("seed", int), ("schedule_steps", int), ("escape_radius", float),
                      ("t0", complex), ("m_infinity", int)):
        for lineno, value in each(key):
            try:
                setattr(pf, key, conv(value.replace(" ", "")))
            except ValueError:
                diags.append(f"line {lineno}: {key} must be {kinds[conv]}, got {value!r}")

    _parse_strata(pf, by_key, diags, guarded)
    return pf, diags


def _parse_strata(pf, by_key, diags, guarded):
    if "siersma" in by_key:
        lineno, value = by_key["siersma"][0]
        kv = guarded(lineno, lambda: {k: int(v) for k, v in _kv_list(value).items()})
        if kv is not None:
            if set(kv) != {"n", "clk_reduced_chi", "k"}:
                diags.append(f"line {lineno}: siersma needs n, clk_reduced_chi and k")
            else:
                pf.siersma = kv
    if "stratum" not in by_key:
        for key in ("closure", "mu", "clk_chi", "chi_minus_h", "eu", "nearby"):
            if key in by_key:
                diags.append(f"line {by_key[key][0][0]}: {key!r} given without any 'stratum'")
        return
    strata = []
    for lineno, value in by_key["stratum"]:
        def one(value=value):
            parts = [p.strip() for p in value.split(",")]
            sid, opts = parts[0], _kv_list(",".join(parts[1:])) if len(parts) > 1 else {}
            if not re.fullmatch(r"\w+", sid):
                raise ValueError(f"bad stratum id {sid!r}")
            unknown = set(opts) - {"dim", "singular", "value"}
            if unknown or "dim" not in opts:
                raise ValueError("stratum needs dim=<int> and may carry singular=, value=")
            sing = opts.get("singular", "yes").lower()
            if sing not in ("yes", "no", "true", "false"):
                raise ValueError(f"singular must be yes or no, not {sing!r}")
            value_tag = _rational(opts["value"]) if "value" in opts else None
            return Stratum(sid, int(opts["dim"]), sing in ("yes", "true"), value_tag)
        s = guarded(lineno, one)
        if s is not None:
            strata.append(s)
    closure = []
    for lineno, value in by_key.get("closure", []):
        p = guarded(lineno, lambda: _pair(value))
        if p is not None:
            closure.append((lineno, p))
    if "ambient_dim" in by_key:
        lineno, value = by_key["ambient_dim"][0]
        amb = guarded(lineno, lambda: int(value))
    else:
        diags.append(f"line {by_key['stratum'][0][0]}: stratification needs 'ambient_dim'")
        amb = None
    if amb is None:
        return
    # validate pairs one by one so each error points at its own line
    ids = {s.id: s for s in strata}
    good = []
    for lineno, (v, s) in closure:
        if v not in ids or s not in ids:
            diags.append(f"line {lineno}: closure pair names an unknown stratum")
        elif ids[v].dim >= ids[s].dim:
            diags.append(f"line {lineno}: closure {v} < {s} needs dim {v} < dim {s}")
        else:
            good.append((v, s))
    try:
        pf.poset = StratumPoset(strata, good, amb)
    except InconsistentStrataError as exc:
        diags.append(f"line {by_key['stratum'][0][0]}: {exc}")
        return

    def ints(key, pair_key=False, two=False):
        out = {}
        for lineno, value in by_key.get(key, []):
            def one(value=value):
                lhs, rhs = _assign(value)
                k = _pair(lhs) if pair_key else lhs
                ref = k if pair_key else (k,)
                for sid in ref:
                    if sid not in ids:
                        raise ValueError(f"unknown stratum {sid!r}")
                val = tuple(int(x) for x in rhs.split(",")) if two else int(rhs)
                if two and len(val) != 2:
                    raise ValueError("expected two integers")
                return k, val
            r = guarded(lineno, one)
            if r is not None:
                out[r[0]] = r[1]
        return out

    pf.strat_data = StratumData(ints("mu"), ints("clk_chi", True), ints("chi_minus_h"), ints("eu"))
    pf.nearby = ints("nearby", True, True)


def load_problem(path: str) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    pf, diags = parse_problem(text)
    if diags:
        raise ProblemFileError(diags)
    return pf
