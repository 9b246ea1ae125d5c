"""Homotopy continuation for critical points of f_t = f - t*l on X_reg.

The critical points are the x-parts of solutions of a square Lagrange system
(``build_critical_system``).  Solutions at a starting value t_0 come from a
total-degree homotopy; each one is then followed along a geometric schedule
t_k = t_0 * factor**k and classified as converging, escaping, or undetermined.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import IllConditionedError, UnanchoredLimitError
from .geometry import CandidatePointSet, VarietySpec, scaled_residual
from .kernels import TrackSettings, WeightedSystem
from .polycore import LinearForm, Polynomial, Ring

log = logging.getLogger(__name__)

DEDUP_RADIUS = 1e-8
RESIDUAL_TOL = 1e-10
MAX_FAILURE_RATE = 0.2
MAX_BEZOUT = 50000
SCHEDULE_STEPS = 40
SCHEDULE_FACTOR = 0.5
T0_MODULUS = 0.1
ESCAPE_RADIUS = 1e8
MAX_RESTARTS = 3


# ---------------------------------------------------------------------------
# square systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SquareSystem:
    """Equations  B_0 + t * B_1 = 0  in the unknowns (x_1..x_N, lambda_1..lambda_c).

    ``blocks[0]`` carries the t-independent part, ``blocks[1]`` the part
    multiplied by t.  ``weights`` fixes the value of t for solving.
    """

    ring: Ring
    blocks: tuple[tuple[Polynomial, ...], ...]
    weights: tuple[complex, ...]
    nx: int
    constraints: tuple[Polynomial, ...]
    provenance: str

    @property
    def size(self) -> int:
        return self.ring.nvars

    @property
    def degrees(self) -> list[int]:
        return [max(max(b[i].degree for b in self.blocks), 1) for i in range(self.size)]

    def at(self, t: complex) -> "SquareSystem":
        return SquareSystem(self.ring, self.blocks, (1.0, complex(t)), self.nx,
                            self.constraints, self.provenance)

    def weighted(self) -> WeightedSystem:
        return WeightedSystem.from_blocks([list(b) for b in self.blocks], self.size)

    def residual(self, z: np.ndarray) -> float:
        out = 0.0
        for i in range(self.size):
            val = sum(w * b[i](z) for w, b in zip(self.weights, self.blocks))
            scale = max(1.0, float(np.max(np.abs(z)))) ** self.degrees[i]
            out = max(out, abs(val) / scale)
        return out


def _recombine(gens: list[Polynomial], c: int, rng) -> list[Polynomial]:
    if len(gens) == c:
        return list(gens)
    out = []
    for _ in range(c):
        coeffs = rng.integers(-9, 10, size=len(gens))
        coeffs[coeffs == 0] = 1
        out.append(sum((g * int(a) for g, a in zip(gens, coeffs)), Polynomial.zero(gens[0].ring)))
    return out


def _jac_rank_ok(hs: list[Polynomial], N: int, rng) -> bool:
    x = rng.normal(size=N) + 1j * rng.normal(size=N)
    J = np.array([[h.diff(i)(x) for i in range(N)] for h in hs])
    s = np.linalg.svd(J, compute_uv=False)
    return s[-1] > 1e-8 * s[0]


def build_critical_system(X: VarietySpec, f: Polynomial, l: LinearForm | None,
                          t: complex = 0.0, seed: int = 0) -> SquareSystem:
    """Lagrange system  h = 0,  grad f - t grad l = sum_j lambda_j grad h_j.

    The k generators of X are replaced by c = codim X random integer
    combinations, so extra solutions can appear; ``on_variety`` filters them.
    """
    ring, N, c = X.ring, X.ring.nvars, X.codim
    gens = X.equations if c else []
    rng = np.random.default_rng(seed + 101)
    hs = []
    for _ in range(5):
        hs = _recombine(gens, c, rng) if c else []
        if not c or _jac_rank_ok(hs, N, rng):
            break
    else:
        raise IllConditionedError("could not find a nondegenerate recombination of X's equations")
    lam = [f"_lam{j + 1}" for j in range(c)]
    big = Ring(tuple(ring.names) + tuple(lam))
    emb = [Polynomial.variable(big, i) for i in range(N)]
    hs_b = [h.substitute(emb) for h in hs]
    f_b = f.substitute(emb)
    lv = [Polynomial.variable(big, N + j) for j in range(c)]
    zero = Polynomial.zero(big)
    base = list(hs_b)
    moving = [zero] * c
    lcoef = l.coefficients if l is not None else (0,) * N
    for i in range(N):
        eq = f_b.diff(i)
        for j in range(c):
            eq = eq - lv[j] * hs_b[j].diff(i)
        base.append(eq)
        moving.append(Polynomial.constant(big, -Fraction(lcoef[i])))
    return SquareSystem(big, (tuple(base), tuple(moving)), (1.0, complex(t)), N,
                        tuple(X.equations) if c else (), "lagrange" if c else "gradient")


def on_variety(S: SquareSystem, z: np.ndarray, codim: int, tol: float = 1e-8) -> bool:
    """Keep solutions lying on X (all original equations) where rank Jac X = codim."""
    if not S.constraints:
        return True
    x = z[:S.nx]
    if max(scaled_residual(g, x) for g in S.constraints) > tol:
        return False
    J = np.array([[g.diff(i)(x) for i in range(S.nx)] for g in S.constraints])
    s = np.linalg.svd(J, compute_uv=False)
    return len(s) >= codim and s[codim - 1] > 1e-8 * max(1.0, s[0])


# ---------------------------------------------------------------------------
# total-degree homotopy
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    solutions: list[np.ndarray]
    bezout: int
    diverged: int
    singular: int
    failed: int
    singular_points: list[np.ndarray] = field(default_factory=list)


def _start_block(degrees: Sequence[int], roots: np.ndarray, n: int):
    exps, coefs, eq = [], [], []
    for i, d in enumerate(degrees):
        e = [0] * n
        e[i] = d
        exps.append(e)
        coefs.append(1.0)
        eq.append(i)
        exps.append([0] * n)
        coefs.append(-roots[i])
        eq.append(i)
    return (np.array(exps, dtype=np.int64), np.array(coefs, dtype=np.complex128),
            np.array(eq, dtype=np.int64))


def _dedup(points: list[np.ndarray], radius: float = DEDUP_RADIUS) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > radius * (1 + np.linalg.norm(p)) for q in out):
            out.append(p)
    return out


def _sort_points(points):
    return sorted(points, key=lambda p: tuple(np.round(np.concatenate([p.real, p.imag]), 8)))


def solve_total_degree(S: SquareSystem, seed: int = 0,
                       settings: TrackSettings = TrackSettings(),
                       use_numba: bool | None = None) -> SolveResult:
    """All isolated finite roots of S at its fixed weights (gamma trick)."""
    n = S.size
    degrees = S.degrees
    bezout = math.prod(degrees)
    if bezout > MAX_BEZOUT:
        raise IllConditionedError(f"Bezout number {bezout} exceeds the desk-scale cap",
                                  {"bezout": bezout})
    rng = np.random.default_rng(seed + 17)
    gamma = np.exp(2j * np.pi * rng.random())
    roots = np.exp(2j * np.pi * rng.random(n))
    system = S.weighted().with_block(_start_block(degrees, roots, n))
    K = system.nblocks
    w0 = np.zeros(K, dtype=np.complex128)
    w0[-1] = gamma
    w1 = np.zeros(K, dtype=np.complex128)
    w1[:len(S.weights)] = S.weights
    target = S.weighted()
    wt = np.asarray(S.weights, dtype=np.complex128)

    per_var = [[roots[i] ** (1.0 / d) * np.exp(2j * np.pi * k / d) for k in range(d)]
               for i, d in enumerate(degrees)]
    found, diverged, singular, failed = [], 0, 0, 0
    singular_points = []
    for start in itertools.product(*per_var):
        res = kernels.track_path(system, np.array(start), w0, w1, settings, use_numba)
        norm = float(np.linalg.norm(res.x))
        if res.status == kernels.DIVERGED or (res.status != kernels.OK and norm > 1e4 and res.tau > 0.5):
            diverged += 1
            continue
        x, conv, _, _, contraction = kernels.newton_weighted(target, res.x, wt, 1e-14, 8, use_numba)
        ok = conv and contraction < 0.5 and S.residual(x) < RESIDUAL_TOL
        if ok:
            found.append(np.asarray(x))
        elif res.status == kernels.OK or S.residual(res.x) < 1e-6:
            # endpoint on a positive-dimensional or multiple solution
            if np.linalg.norm(x) > 1e6:
                diverged += 1
            else:
                singular += 1
                singular_points.append(np.asarray(x))
        else:
            failed += 1
    if failed > MAX_FAILURE_RATE * bezout:
        raise IllConditionedError(
            f"{failed} of {bezout} homotopy paths failed",
            {"bezout": bezout, "failed": failed, "diverged": diverged, "singular": singular})
    sols = _sort_points(_dedup(found))
    return SolveResult(sols, bezout, diverged, singular, failed, singular_points)


# ---------------------------------------------------------------------------
# the t-family
# ---------------------------------------------------------------------------

TRACKING, CONVERGED, ESCAPED, FAILED = "tracking", "converged", "escaped", "failed"


@dataclass
class PathRecord:
    states: list[np.ndarray]
    status: str = TRACKING
    limit: np.ndarray | None = None
    residuals: list[float] = field(default_factory=list)
    note: str = ""


@dataclass
class TrajectoryBundle:
    t_schedule: list[complex]
    paths: list[PathRecord]
    nx: int
    t_zero: complex
    seed: int
    restarts: int = 0

    def count(self, status: str) -> int:
        return sum(p.status == status for p in self.paths)


def make_schedule(t0: complex, steps: int = SCHEDULE_STEPS,
                  factor: float = SCHEDULE_FACTOR) -> list[complex]:
    return [t0 * factor ** k for k in range(steps + 1)]


def classify_path(xs: Sequence[np.ndarray], factor: float = SCHEDULE_FACTOR,
                  escape_radius: float = ESCAPE_RADIUS):
    """Decide escape / convergence from the x-history of one path.

    Escape: the norm exceeds ``escape_radius`` with growth over the last
    three steps, or grows like a power of 1/|t| over the last eight steps.
    Convergence: successive moves fall below 1e-7, or shrink geometrically
    with a small extrapolated tail.  Returns ``(status, limit)``.
    """
    norms = np.array([np.linalg.norm(x) for x in xs])
    if len(norms) >= 4 and norms[-1] > escape_radius and np.all(np.diff(norms[-4:]) > 0):
        return ESCAPED, None
    window = 8
    if len(norms) > window:
        ratios = norms[-window:] / np.maximum(norms[-window - 1:-1], 1e-300)
        if np.all(ratios >= (1.0 / factor) ** 0.05) and norms[-1] > 10.0 * (1.0 + norms[0]):
            return ESCAPED, None
    if len(xs) < 3:
        return FAILED, None
    d = np.array([np.linalg.norm(xs[k + 1] - xs[k]) for k in range(len(xs) - 1)])
    scale = 1.0 + norms[-1]
    if d[-1] < 1e-7 * scale:
        return CONVERGED, np.asarray(xs[-1])
    if len(d) >= 5 and np.all(d[-5:] > 0):
        rho = d[-4:] / d[-5:-1]
        r = float(np.median(rho))
        if np.all(rho < 0.98) and float(np.ptp(rho)) < 0.1:
            tail = d[-1] * r / (1.0 - r)
            if tail < 1e-3 * scale:
                return CONVERGED, np.asarray(xs[-1] + (xs[-1] - xs[-2]) * r / (1.0 - r))
    return FAILED, None


def _cond(system: WeightedSystem, z, w, use_numba) -> float:
    _, J = kernels.evaluate_weighted(system, z, w, use_numba)
    return float(np.linalg.cond(J))


class _Restart(Exception):
    pass


def track_family(X: VarietySpec, f: Polynomial, l: LinearForm, seed: int = 0, *,
                 t0: complex | None = None, steps: int = SCHEDULE_STEPS,
                 factor: float = SCHEDULE_FACTOR, escape_radius: float = ESCAPE_RADIUS,
                 settings: TrackSettings | None = None,
                 use_numba: bool | None = None) -> TrajectoryBundle:
    """Critical points of f - t*l on X_reg followed from t_0 toward 0."""
    if settings is None:
        settings = TrackSettings(escape_radius=1e300)
    big = max(abs(c) for c in l.coefficients)
    lnorm = LinearForm(tuple(c / big for c in l.coefficients))
    rng = np.random.default_rng(seed + 3)
    last_error = None
    for attempt in range(MAX_RESTARTS + 1):
        t_start = t0 if (t0 is not None and attempt == 0) else \
            T0_MODULUS * np.exp(2j * np.pi * rng.random())
        try:
            bundle = _track_once(X, f, lnorm, seed + 1000 * attempt, complex(t_start),
                                 steps, factor, escape_radius, settings, use_numba)
            bundle.restarts = attempt
            return bundle
        except _Restart as exc:
            last_error = exc
            log.info("restarting the t-family: %s", exc)
    raise IllConditionedError(f"t-family did not stabilise after {MAX_RESTARTS} restarts: {last_error}")


def _track_once(X, f, l, seed, t0, steps, factor, escape_radius, settings, use_numba):
    S = build_critical_system(X, f, l, t0, seed)
    solved = solve_total_degree(S, seed, use_numba=use_numba)
    system = S.weighted()
    starts = [z for z in solved.solutions if on_variety(S, z, X.codim)]
    for z in starts:
        if _cond(system, z, np.array([1.0, t0]), use_numba) > 1e10:
            raise _Restart("degenerate critical point at t_0")
    schedule = make_schedule(t0, steps, factor)
    paths = [PathRecord([z]) for z in starts]
    current = [z.copy() for z in starts]
    alive = [True] * len(paths)
    for k in range(steps):
        wa = np.array([1.0, schedule[k]], dtype=np.complex128)
        wb = np.array([1.0, schedule[k + 1]], dtype=np.complex128)
        for i, z in enumerate(current):
            if not alive[i]:
                continue
            res = kernels.track_path(system, z, wa, wb, settings, use_numba)
            if res.status != kernels.OK:
                alive[i] = False
                paths[i].note = f"stopped at t-step {k}: {res.status_name}"
                continue
            current[i] = res.x
            paths[i].states.append(res.x)
        _check_merges(system, current, alive, wb, use_numba)
    for i, p in enumerate(paths):
        xs = [z[:S.nx] for z in p.states]
        p.status, p.limit = classify_path(xs, factor, escape_radius)
        tk = schedule[len(p.states) - 1]
        p.residuals = [S.at(tk).residual(p.states[-1])]
    return TrajectoryBundle(schedule, paths, S.nx, t0, seed)


def _check_merges(system, current, alive, w, use_numba):
    idx = [i for i in range(len(current)) if alive[i]]
    for a, b in itertools.combinations(idx, 2):
        za, zb = current[a], current[b]
        if np.linalg.norm(za - zb) < 1e-8 * (1 + np.linalg.norm(za)):
            if _cond(system, za, w, use_numba) < 1e8:
                raise _Restart("two paths merged at a regular point")


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

@dataclass
class LimitPoint:
    point: np.ndarray
    exact: tuple[Fraction, ...] | None
    multiplicity: int


@dataclass
class LimitReport:
    limit_points: list[LimitPoint]
    m_infinity: int
    total_morse: int
    seed: int
    t_zero: complex
    anchored: bool = True
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if sum(p.multiplicity for p in self.limit_points) + self.m_infinity != self.total_morse:
            raise AssertionError("conservation law violated")

    def multiplicity_at(self, point, tol: float = 1e-6) -> int:
        point = np.asarray(point, dtype=np.complex128)
        for lp in self.limit_points:
            if np.linalg.norm(lp.point - point) <= tol * (1 + np.linalg.norm(point)):
                return lp.multiplicity
        return 0


def snap_radius(candidates: CandidatePointSet) -> float:
    pts = candidates.points
    if len(pts) < 2:
        return 1.0
    dmin = min(np.linalg.norm(p - q) for p, q in itertools.combinations(pts, 2))
    return max(dmin / 2.0, 1e-6)


def _empirical_clusters(limits: list[np.ndarray], radius: float = 1e-4):
    groups: list[list[np.ndarray]] = []
    for x in limits:
        for g in groups:
            if np.linalg.norm(g[0] - x) < radius * (1 + np.linalg.norm(x)):
                g.append(x)
                break
        else:
            groups.append([x])
    return [(np.mean(g, axis=0), len(g)) for g in groups]


def classify_limits(B: TrajectoryBundle, candidates: CandidatePointSet | None) -> LimitReport:
    """Snap converged endpoints to candidate points and count escapes.

    ``candidates=None`` means no candidate set is known (non-isolated case):
    endpoints are then clustered among themselves and marked unanchored.
    """
    failed = [p for p in B.paths if p.status == FAILED]
    if failed:
        raise IllConditionedError(
            f"{len(failed)} of {len(B.paths)} Morse paths could not be classified",
            {"notes": [p.note for p in failed]})
    limits = [p.limit for p in B.paths if p.status == CONVERGED]
    m_inf = B.count(ESCAPED)
    warnings = []
    if candidates is None:
        pts = [LimitPoint(c, None, n) for c, n in _empirical_clusters(limits)]
        warnings.append("no candidate set: limits clustered empirically")
        return LimitReport(_sorted_limits(pts), m_inf, len(B.paths), B.seed, B.t_zero, False, warnings)
    radius = snap_radius(candidates)
    counts = [0] * len(candidates)
    for x in limits:
        if not len(candidates):
            raise UnanchoredLimitError(f"limit {x} found but no candidate points exist")
        dists = [np.linalg.norm(x - p) for p in candidates.points]
        k = int(np.argmin(dists))
        if dists[k] > radius:
            raise UnanchoredLimitError(
                f"limit {np.round(x, 8)} lies {dists[k]:.3g} from the nearest candidate "
                f"(snap radius {radius:.3g})")
        counts[k] += 1
    pts = [LimitPoint(candidates.points[k], candidates.exact[k], counts[k])
           for k in range(len(candidates)) if counts[k] > 0]
    return LimitReport(pts, m_inf, len(B.paths), B.seed, B.t_zero, True, warnings)


def _sorted_limits(pts: list[LimitPoint]) -> list[LimitPoint]:
    return sorted(pts, key=lambda p: tuple(np.round(np.concatenate([p.point.real, p.point.imag]), 8)))
