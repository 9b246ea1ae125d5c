"""Command-line front end.

    morsepolar {polar,morsify,multiplicity,stratcalc,eddeg,validate} FILE [options]

Reports are JSON documents (schema ``morsepolar-report/1``) written to stdout
or ``--output``.  Exit codes: 0 success, 1 I/O or parse error, 2 input outside
the supported mathematical scope.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .eddeg import (EDProblem, ed_degree_both, ed_degree_polar, ed_degree_tracking)
from .errors import ResourceLimitError, ScopeError
from .geometry import (VarietySpec, generic_polar_curve, solve_zero_dimensional)
from .ideals import krull_dimension
from .multiplicity import milnor_number_oracle, polar_multiplicities, resultant_order_bivariate
from .problemfile import ProblemFile, ProblemFileError, load_problem, parse_problem
from .stratcalc import (closed_form_nv, morse_count_formula, mu_from_defect,
                        siersma_identity_check, solve_nv)
from .tracker import classify_limits, track_family

SCHEMA = "morsepolar-report/1"
DIGITS = 10


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def q(x) -> str:
    return str(Fraction(x))


def cnum(z) -> list[float]:
    z = complex(z)
    re_, im_ = round(z.real, DIGITS), round(z.imag, DIGITS)
    return [re_ + 0.0, im_ + 0.0]


def point_json(point, exact=None) -> dict:
    out = {"approx": [cnum(z) for z in point]}
    if exact is not None:
        out["exact"] = [q(v) for v in exact]
    return out


def ideal_json(I) -> list[str]:
    return [str(g) for g in I.gb]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _variety(pf: ProblemFile) -> VarietySpec:
    ring = pf.ring
    if not pf.variety:
        return VarietySpec.affine_space(ring)
    return VarietySpec.from_polys(pf.variety, ring, pf.strata_ideals)


def _problem(pf: ProblemFile, seed: int) -> EDProblem:
    X = _variety(pf)
    if pf.function is not None:
        return EDProblem(X, None, seed, function=pf.function, linear_form=pf.linear_form)
    if pf.data_point is None:
        raise ProblemFileError(["the problem needs 'function' or 'data_point'"])
    return EDProblem(X, pf.data_point, seed, linear_form=pf.linear_form)


def _track_kwargs(args, pf: ProblemFile) -> dict:
    kw = {}
    t0 = args.t0 if args.t0 is not None else pf.t0
    if t0 is not None:
        kw["t0"] = complex(t0)
    steps = args.schedule_steps if args.schedule_steps is not None else pf.schedule_steps
    if steps is not None:
        kw["steps"] = steps
    radius = args.escape_radius if args.escape_radius is not None else pf.escape_radius
    if radius is not None:
        kw["escape_radius"] = radius
    return kw


def cmd_polar(pf, args, seed):
    prob = _problem(pf, seed)
    G, crit, cand = generic_polar_curve(prob.X, prob.f, seed, pf.linear_form)
    cands = solve_zero_dimensional(cand, seed)
    return {
        "linear_form": [q(c) for c in G.linear_form.coefficients],
        "polar_ideal": ideal_json(G.ideal),
        "polar_dimension": G.dimension,
        "polar_empty": G.is_empty(),
        "critical_ideal": ideal_json(crit),
        "candidates": [point_json(p, e) for p, e in zip(cands.points, cands.exact)],
    }, (["polar locus empty"] if G.is_empty() else [])


def cmd_morsify(pf, args, seed):
    prob = _problem(pf, seed)
    G, crit, cand = generic_polar_curve(prob.X, prob.f, seed, pf.linear_form)
    cands = solve_zero_dimensional(cand, seed)
    bundle = track_family(prob.X, prob.f, G.linear_form, seed, **_track_kwargs(args, pf))
    rep = classify_limits(bundle, cands)
    return {
        "linear_form": [q(c) for c in G.linear_form.coefficients],
        "t0": cnum(rep.t_zero),
        "restarts": bundle.restarts,
        "limits": [dict(point_json(lp.point, lp.exact), multiplicity=lp.multiplicity)
                   for lp in rep.limit_points],
        "m_infinity": rep.m_infinity,
        "total_morse": rep.total_morse,
    }, rep.warnings


def cmd_multiplicity(pf, args, seed):
    prob = _problem(pf, seed)
    f = prob.f
    G, crit, cand = generic_polar_curve(prob.X, f, seed, pf.linear_form)
    cands = solve_zero_dimensional(cand, seed)
    if pf.points:
        targets = [(np.array([complex(v) for v in p]), p) for p in pf.points]
    else:
        targets = list(zip(cands.points, cands.exact))
    rows = []
    smooth = prob.X.codim == 0
    for pt, exact in targets:
        src = exact if exact is not None else pt
        pm = polar_multiplicities(G, f, G.linear_form, src, seed, others=cands.points)
        row = dict(point_json(pt, exact), n_p=pm.n_p, mult_f=pm.mult_f, mult_l=pm.mult_l)
        if exact is not None and prob.X.ring.nvars == 2 and len(G.ideal.gb) == 1:
            row["resultant_mult_f"] = resultant_order_bivariate(G, f, exact, seed)
            row["resultant_mult_l"] = resultant_order_bivariate(
                G, G.linear_form.to_polynomial(prob.X.ring), exact, seed)
        if exact is not None and smooth:
            row["milnor_number"] = milnor_number_oracle(f, exact, seed)
        rows.append(row)
    return {"linear_form": [q(c) for c in G.linear_form.coefficients], "points": rows}, []


def cmd_stratcalc(pf, args, seed):
    if not pf.has_stratification:
        raise ProblemFileError(["stratcalc needs a stratification block or a 'siersma' line"])
    out, warnings = {}, []
    if pf.poset is not None:
        P, D = pf.poset, pf.strat_data
        if pf.nearby:
            mu = mu_from_defect(P, D, pf.nearby)
            out["mu_from_defect"] = mu
            if not D.mu:
                D.mu = mu
        if D.mu:
            res = solve_nv(P, D, strict=False)
            out["n"] = res.n
            out["n_closed_form"] = closed_form_nv(P, D)
            out["reassembled_mu"] = res.reassembled_mu
            out["round_trip_ok"] = all(res.reassembled_mu[v] == int(D.mu[v]) for v in res.reassembled_mu)
            if res.negative:
                warnings.append(f"negative multiplicities (inconsistent input) on {res.negative}")
            if D.chi_minus_h:
                out["morse_count"] = morse_count_formula(P, D, pf.m_infinity or 0)
    if pf.siersma is not None:
        n0, audit = siersma_identity_check(pf.siersma["n"], pf.siersma["clk_reduced_chi"],
                                           pf.siersma["k"])
        out["siersma"] = audit
    return out, warnings


def cmd_eddeg(pf, args, seed):
    prob = _problem(pf, seed)
    method = args.method
    if method == "polar":
        rep = ed_degree_polar(prob, args.no_escape_assert)
    elif method == "tracking":
        rep = ed_degree_tracking(prob, **_track_kwargs(args, pf))
    else:
        rep = ed_degree_both(prob, args.no_escape_assert)

    def row(p):
        d = point_json(p.point, p.exact)
        for key in ("n_p", "mult_f", "mult_l", "tracked"):
            if getattr(p, key) is not None:
                d[key] = getattr(p, key)
        return d

    return {
        "method": rep.method,
        "status": rep.status,
        "provenance": rep.provenance,
        "ed_degree": rep.ed_degree,
        "m_infinity": rep.m_infinity,
        "total_morse": rep.total_morse,
        "points": [row(p) for p in rep.per_point],
        "null_points": [row(p) for p in rep.null_points],
        "agreement": rep.agreement,
        "linear_form": [q(c) for c in rep.linear_form.coefficients] if rep.linear_form else None,
    }, rep.warnings


COMMANDS = {
    "polar": cmd_polar,
    "morsify": cmd_morsify,
    "multiplicity": cmd_multiplicity,
    "stratcalc": cmd_stratcalc,
    "eddeg": cmd_eddeg,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="morsepolar",
                                 description="Limits of Morsification trajectories and polar multiplicities.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS) + ["validate"])
    ap.add_argument("file", help="problem file")
    ap.add_argument("--seed", type=int, default=None, help="random seed (default: file, else 0)")
    ap.add_argument("--t0", type=complex, default=None, help="starting t, e.g. 0.05+0.08j")
    ap.add_argument("--schedule-steps", type=int, default=None,
                    help="number of halvings of t (default 40)")
    ap.add_argument("--escape-radius", type=float, default=None,
                    help="norm beyond which a growing path counts as escaped (default 1e8)")
    ap.add_argument("--no-escape-assert", action="store_true",
                    help="assert that no Morse point escapes; a detected escape marks the report FAILED")
    ap.add_argument("--method", choices=["polar", "tracking", "both"], default="both",
                    help="ED pipeline (default both)")
    ap.add_argument("--timing", action="store_true", help="include wall time in the report")
    ap.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _emit(doc: dict, output: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return 1
    pf, diags = parse_problem(text)
    if args.command == "validate":
        _emit({"schema": SCHEMA, "command": "validate", "diagnostics": diags}, args.output)
        return 0 if not diags else 1
    if diags:
        for d in diags:
            print(f"{args.file}: {d}", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else (pf.seed if pf.seed is not None else 0)
    start = time.perf_counter()
    try:
        result, warnings = COMMANDS[args.command](pf, args, seed)
    except ProblemFileError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}: {d}", file=sys.stderr)
        return 1
    except (ScopeError, ResourceLimitError) as exc:
        print(f"{args.file}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    doc = {"schema": SCHEMA, "command": args.command, "inputs": pf.echo, "seed": seed,
           "result": result, "warnings": list(warnings)}
    if args.timing:
        doc["seconds"] = round(time.perf_counter() - start, 3)
    _emit(doc, args.output)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
