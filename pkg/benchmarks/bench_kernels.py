"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times one system evaluation, one total-degree solve and one full t-family
tracking run on the cardioid and on a Milnor-type plane problem.  Numba
compilation happens in a warm-up call and is reported separately.
"""
from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from morsepolar import _accel
from morsepolar.geometry import VarietySpec
from morsepolar.kernels import evaluate_weighted
from morsepolar.polycore import Ring, parse_polynomial, sample_generic_linear
from morsepolar.tracker import build_critical_system, solve_total_degree, track_family

R2 = Ring(("x", "y"))


def problems():
    cardioid = VarietySpec.from_polys([parse_polynomial("(x^2 + y^2 + x)^2 - (x^2 + y^2)", R2)], R2)
    plane = VarietySpec.affine_space(R2)
    return [("cardioid", cardioid, parse_polynomial("x^2 + y^2", R2)),
            ("x^2*y + y^4", plane, parse_polynomial("x^2*y + y^4", R2))]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def run(repeat: int):
    backends = [False] + ([True] if _accel.USE_NUMBA else [])
    rows = []
    for name, X, f in problems():
        l = sample_generic_linear(2, 1)
        S = build_critical_system(X, f, l, 0.1, 1)
        system = S.weighted()
        x = np.array([0.3 + 0.1j] * S.size)
        w = np.array([1.0, 0.1], dtype=complex)
        for use_numba in backends:
            start = time.perf_counter()
            track_family(X, f, l, 1, use_numba=use_numba)
            warm = time.perf_counter() - start
            cases = {
                "evaluate x1000": lambda: [evaluate_weighted(system, x, w, use_numba) for _ in range(1000)],
                "solve": lambda: solve_total_degree(S, 1, use_numba=use_numba),
                "track_family": lambda: track_family(X, f, l, 1, use_numba=use_numba),
            }
            for label, fn in cases.items():
                rows.append((name, label, "numba" if use_numba else "numpy", best_of(fn, repeat)))
            rows.append((name, "first call", "numba" if use_numba else "numpy", warm))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rows = run(args.repeat)
    print(f"{'problem':<14}{'operation':<16}{'backend':<8}{'seconds':>10}")
    for name, label, backend, secs in rows:
        print(f"{name:<14}{label:<16}{backend:<8}{secs:>10.4f}")
    timing = {(n, o, b): s for n, o, b, s in rows}
    for name, op in sorted({(n, o) for n, o, _, _ in rows if o != "first call"}):
        if (name, op, "numba") in timing:
            print(f"speedup {name} / {op}: {timing[(name, op, 'numpy')] / timing[(name, op, 'numba')]:.1f}x")


if __name__ == "__main__":
    main()
