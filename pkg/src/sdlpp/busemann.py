"""Truncated multi-path Busemann estimators with stabilization detection.

A Busemann value is the limit of last passage values along rays going
down-left, recentered by a normalization that keeps the limit finite.
On a sampled environment the finite-truncation values become exactly
constant once the relevant geodesics coalesce, so the estimators
evaluate at doubling depths and declare stabilization when two
successive depths agree on the full query.

Start lines at truncation depth T follow floor(theta_i * T) + k.  The
minimal normalization subtracts one joint value per distinct direction
(grouped); the over-normalization subtracts the single joint value at
0^k, so it vanishes there.  Negative directions go through the
reflection identity and never get a second code path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import env as envmod
from .env import BrownianField, Environment
from .lpp import EndpointPair, lpp_profile, multi_lpp, restricted_profile
from .pitman import corner_sort

__all__ = [
    "BusemannQuery", "BusemannSample", "InsufficientEnvironmentError",
    "busemann", "sampled_busemann", "shear", "check_shear_group",
    "check_busemann_isometry", "busemann_law_environment",
    "check_restricted_busemann", "write_samples_csv",
]

STAB_TOL = 1e-9
CORNER_PRUNE = 1e-12  # melon prune budget; total error << cross-route 1e-6
LINE_MARGIN = 8
ENV_CELL_BUDGET = 40_000_000


class InsufficientEnvironmentError(RuntimeError):
    """The environment is too small for the requested truncation depth."""


@dataclass(frozen=True)
class BusemannQuery:
    theta: tuple
    xs: tuple
    normalization: str = "minimal"   # or "over"

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=np.float64)
        xs = np.asarray(self.xs, dtype=np.float64)
        if th.shape != xs.shape or th.ndim != 1 or th.size < 1:
            raise ValueError("theta and xs must be equal-length vectors")
        if np.any(np.diff(th) < 0) or np.any(np.diff(xs) < 0):
            raise ValueError("theta and xs must be nondecreasing")
        if not (np.all(th >= 0) or np.all(th <= 0)):
            raise ValueError("theta must be sign-homogeneous")
        if self.normalization not in ("minimal", "over"):
            raise ValueError("normalization must be 'minimal' or 'over'")

    @property
    def k(self):
        return len(self.theta)


@dataclass(frozen=True)
class BusemannSample:
    value: float
    trunc_depth: float
    stabilized: bool
    lines_used: int


def _groups(theta, tol=1e-9):
    """Runs of equal direction entries, as index lists."""
    out = [[0]]
    for i in range(1, len(theta)):
        if abs(theta[i] - theta[i - 1]) <= tol:
            out[-1].append(i)
        else:
            out.append([i])
    return out


def _start_lines(theta, T, k):
    return [int(np.floor(th * T)) + k for th in theta]


def _require(env, T, top_line, right_edge):
    if env.grid[0] > -T + 1e-9 or env.n_lines < top_line or \
            env.grid[-1] < right_edge - 1e-9:
        raise InsufficientEnvironmentError(
            f"environment covers {env.n_lines} lines on "
            f"[{env.grid[0]:g}, {env.grid[-1]:g}]; need line {top_line} and "
            f"depth {T:g}")


class _CornerCache:
    """corner_sort results per (depth, top line) within one evaluation."""

    def __init__(self, env):
        self.env = env
        self.store = {}

    def get(self, T, m):
        key = (T, m)
        if key not in self.store:
            self.store[key] = corner_sort(self.env, -float(T), m,
                                          prune_tol=CORNER_PRUNE)
        return self.store[key]


def _term_common_end(env, cache, T, lines, targets):
    """B[(-T, lines) -> (c^k, 1)] for each target c; lines nondecreasing."""
    k = len(lines)
    targets = np.asarray(targets, dtype=np.float64)
    if k >= 2 and len(set(lines)) == 1:
        W = cache.get(T, lines[0])
        t0 = -float(T)
        return sum(np.asarray(W[i](targets)) - W[i](t0) for i in range(k))
    if k == 1:
        return np.asarray(lpp_profile(env, [-float(T)], [lines[0]], targets))
    if k > 3:
        raise ValueError("distinct-direction queries support k <= 3")
    return np.asarray(lpp_profile(env, [-float(T)] * k, list(lines), targets))


def _normalizers(env, cache, T, theta, lines, normalization):
    k = len(theta)
    if normalization == "over":
        return float(_term_common_end(env, cache, T, lines, [0.0])[0])
    total = 0.0
    for g in _groups(theta):
        glines = [lines[i] for i in g]
        total += float(_term_common_end(env, cache, T, glines, [0.0])[0])
    return total


def _value_at_depth(env, cache, q, T):
    """Finite-truncation Busemann value at depth T (theta >= 0)."""
    k = q.k
    lines = _start_lines(q.theta, T, k)
    _require(env, T, max(lines), max(max(q.xs), 0.0))
    xs = np.asarray(q.xs, dtype=np.float64)
    if np.all(xs == xs[0]):
        main = float(_term_common_end(env, cache, T, lines, [xs[0]])[0])
    else:
        if k > 3:
            raise ValueError("general endpoint vectors support k <= 3")
        pair = EndpointPair((-float(T),) * k, tuple(lines), tuple(xs), (1,) * k)
        main, _ = multi_lpp(env, pair)
    return main - _normalizers(env, cache, T, q.theta, lines, q.normalization)


def default_depth0(xs):
    """Initial truncation depth: four times the query span (floor 1)."""
    span = max(abs(float(np.min(xs))), abs(float(np.max(xs))), 0.25)
    return 4.0 * span


def busemann(envB, q, t0=None, tol=STAB_TOL, max_doublings=10, confirm=False):
    """Estimate the multi-path Busemann value on a fixed environment.

    Doubles the truncation depth until two successive values agree to
    ``tol``.  Negative-direction queries are evaluated through the
    reflection identity on the reflected environment.  Raises
    InsufficientEnvironmentError if even the initial depth does not fit;
    returns stabilized=False when coverage or the doubling cap runs out
    first.
    """
    if q.theta[-1] <= 0 and q.theta[0] < 0:
        return _reflected_busemann(envB, q, t0, tol, max_doublings, confirm)
    cache = _CornerCache(envB)
    T = float(t0 if t0 is not None else default_depth0(q.xs))
    prev = None
    best = (np.nan, T, False)
    for step in range(max_doublings + 1):
        try:
            val = _value_at_depth(envB, cache, q, T)
        except InsufficientEnvironmentError:
            if prev is None:
                raise
            return BusemannSample(best[0], best[1], False,
                                  min(envB.n_lines, _top_line(q, best[1])))
        if prev is not None and abs(val - prev) <= tol:
            if confirm:
                try:
                    val2 = _value_at_depth(envB, cache, q, 2 * T)
                except InsufficientEnvironmentError:
                    val2 = None
                if val2 is not None and abs(val2 - val) > tol:
                    prev, T = val, 2 * T
                    best = (val2, 2 * T, False)
                    continue
            return BusemannSample(val, T, True, _top_line(q, T))
        prev = val
        best = (val, T, False)
        T *= 2.0
    return BusemannSample(best[0], best[1] / 2.0, False,
                          _top_line(q, best[1] / 2.0))


def _top_line(q, T):
    return max(_start_lines(q.theta, T, q.k))


def _reflect_query(q):
    theta = tuple(sorted(-t for t in q.theta))
    xs = tuple(sorted(-x for x in q.xs))
    return BusemannQuery(theta, xs, q.normalization)


def _reflected_busemann(envB, q, t0, tol, max_doublings, confirm):
    return busemann(envmod.reflect(envB), _reflect_query(q), t0, tol,
                    max_doublings, confirm)


# ----------------------------------------------------------------------
# lazily sampled environments

def adequate_env(field, theta_max, T, right_edge, k, extra_lines=0):
    """Window of the field sized for direction theta_max at depth T."""
    lines = int(np.ceil(abs(theta_max) * T)) + k + LINE_MARGIN + extra_lines
    lo = -(abs(theta_max) + 1.0) * T - 2 * field.step
    hi = max(right_edge, 0.0) + 2 * field.step
    cells = (hi - lo) / field.step
    if lines * cells > ENV_CELL_BUDGET:
        raise InsufficientEnvironmentError(
            f"depth {T:g} would need {lines} lines x {cells:.0f} cells")
    return field.window(lines, lo, hi)


def sampled_busemann(field, q, t0=None, tol=STAB_TOL, max_doublings=10,
                     confirm=False):
    """Busemann estimate over a lazily widened sampled environment."""
    if q.theta[-1] <= 0 and q.theta[0] < 0:
        rq = _reflect_query(q)
        rfield = _ReflectedField(field)
        return sampled_busemann(rfield, rq, t0, tol, max_doublings, confirm)
    T = float(t0 if t0 is not None else default_depth0(q.xs))
    prev = None
    val = np.nan
    for step in range(max_doublings + 1):
        try:
            env = _window_for(field, q, T)
            cache = _CornerCache(env)
            val = _value_at_depth(env, cache, q, T)
        except InsufficientEnvironmentError:
            if prev is None:
                raise
            return BusemannSample(val, T / 2.0, False, _top_line(q, T / 2.0))
        if prev is not None and abs(val - prev) <= tol:
            return BusemannSample(val, T, True, _top_line(q, T))
        prev = val
        T *= 2.0
    return BusemannSample(val, T / 2.0, False, _top_line(q, T / 2.0))


def _window_for(field, q, T):
    return adequate_env(field, max(q.theta), T, max(max(q.xs), 0.0), q.k)


class _ReflectedField:
    """View of a BrownianField with x -> -x (for negative directions)."""

    def __init__(self, base):
        self.base = base
        self.step = base.step
        self.seed = base.seed

    def window(self, n_lines, lo, hi):
        return envmod.reflect(self.base.window(n_lines, -hi, -lo))


# ----------------------------------------------------------------------
# the shear B -> B^a

@dataclass(frozen=True)
class ShearResult:
    env: Environment
    stabilized: bool
    depth: float


def shear(source, a, window, m, t0=None, tol=STAB_TOL, max_doublings=8,
          strict=True):
    """Extract the drift-a environment B^a on the window (m lines).

    sum_{i<=l} B^a_i(x) is the Busemann value with all directions equal
    to a|a|/2, evaluated at x^l; the output lines are its successive
    differences and vanish at 0.  ``source`` is a drift-free
    Environment or BrownianField.  a=0 returns the source restricted to
    the window (the zero-direction paths are forced, so the identity
    B^0 = B is exact at every depth).

    With strict=True a stabilization failure raises; otherwise the last
    iterate is returned flagged unstable.
    """
    window = np.asarray(window, dtype=np.float64)
    is_field = hasattr(source, "window")
    if a == 0:
        env = source.window(m, window[0], window[-1]) if is_field else source
        vals = np.stack([env.line(i)(window) - env.line(i)(0.0)
                         for i in range(1, m + 1)])
        return ShearResult(Environment(window, vals, np.zeros(m)), True, 0.0)

    theta = a * abs(a) / 2.0
    reflected = theta < 0
    th = abs(theta)
    targets = np.union1d(window, [0.0]) if not reflected \
        else np.union1d(-window, [0.0])
    T = float(t0 if t0 is not None else default_depth0(window))
    prev = None
    psums = None
    stabilized = False
    for step in range(max_doublings + 1):
        top = int(np.floor(th * T)) + m
        try:
            if is_field:
                base = source.window(top + LINE_MARGIN,
                                     -(th + 1.0) * T - 2 * source.step,
                                     float(targets.max()) + 2 * source.step)
            else:
                base = source
            work = envmod.reflect(base) if reflected else base
            _require(work, T, top, float(targets.max()))
            if work.n_lines * work.grid.size > ENV_CELL_BUDGET:
                raise InsufficientEnvironmentError("window too large")
            W = corner_sort(work, -T, top, prune_tol=CORNER_PRUNE)
            psums = np.zeros((m + 1, targets.size))
            for i in range(m):
                psums[i + 1] = psums[i] + np.asarray(W[i](targets))
            psums = psums[1:]
        except InsufficientEnvironmentError:
            break
        if prev is not None and prev.shape == psums.shape and \
                np.max(np.abs(psums - prev)) <= tol:
            stabilized = True
            break
        prev = psums
        T *= 2.0
    if psums is None:
        raise InsufficientEnvironmentError("shear window never fit")
    if not stabilized and strict:
        raise _stab_error(a, T)
    i0 = int(np.searchsorted(targets, 0.0))
    psums = psums - psums[:, i0][:, None]
    lines = np.empty((m, window.size))
    wv = np.diff(np.vstack([np.zeros(targets.size), psums]), axis=0)
    sel = np.searchsorted(targets, -window[::-1] if reflected else window)
    for ell in range(m):
        row = wv[ell, sel]
        lines[ell] = row[::-1] if reflected else row
    return ShearResult(Environment(window, lines, np.full(m, float(a))),
                       stabilized, T if stabilized else T / 2.0)


# ----------------------------------------------------------------------
# two-route checks

@dataclass(frozen=True)
class CheckResult:
    difference: float
    stabilized: bool
    detail: str = ""


def _coverage_for_dirs(theta, xs, t2_max):
    """Grid interval and line count an environment must cover so a
    depth-t2_max Busemann pass in directions ``theta`` at points ``xs``
    fits (negative directions probe through the reflection)."""
    thmax = max(abs(float(t)) for t in theta)
    k = len(theta)
    lines = int(np.ceil(thmax * t2_max)) + k + LINE_MARGIN
    if min(theta) >= 0:
        lo = -(thmax + 1.0) * t2_max - 1.0
        hi = max(float(np.max(xs)), 0.0) + 1.0
    else:
        lo = min(float(np.min(xs)), 0.0) - 1.0
        hi = (thmax + 1.0) * t2_max + 1.0
    return lo, hi, lines


def check_shear_group(field, a, b, window, m=2, t2_doublings=3,
                      t1_doublings=6):
    """Sup difference of (B^a)^b against B^{a+b} per line on the window.

    Both routes are computed honestly: the first shears the field to
    drift a on a window wide and tall enough for the second stage, then
    shears that finite environment by b.  Zero to tolerance when both
    stages stabilized.
    """
    window = np.asarray(window, dtype=np.float64)
    if b == 0:
        r1 = shear(field, a, window, m, strict=False)
        return CheckResult(0.0, r1.stabilized, "b=0: identity stage")
    t2_0 = default_depth0(np.append(window, 0.0))
    t2_max = t2_0 * 2 ** t2_doublings
    lo, hi, m1 = _coverage_for_dirs((b * abs(b) / 2.0,) * m, window, t2_max)
    wide = np.arange(np.floor(lo / field.step), np.ceil(hi / field.step) + 1) \
        * field.step
    stage1 = shear(field, a, wide, m1, strict=False,
                   max_doublings=t1_doublings)
    stage2 = shear(stage1.env, b, window, m, t0=t2_0,
                   max_doublings=t2_doublings, strict=False)
    direct = shear(field, a + b, window, m, strict=False,
                   max_doublings=t1_doublings)
    diff = float(np.max(np.abs(stage2.env.values - direct.env.values)))
    ok = stage1.stabilized and stage2.stabilized and direct.stabilized
    return CheckResult(diff, ok,
                       f"stages stabilized: {stage1.stabilized}/"
                       f"{stage2.stabilized}/{direct.stabilized}")


def check_busemann_isometry(field, a, lam, xs, t2_doublings=4):
    """|W^{lam+a}(xs; B) - W^{lam}(xs; B^a)| with both routes honest."""
    lam = np.asarray(lam, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    for v in (lam, lam + a):
        if not (np.all(v >= 0) or np.all(v <= 0)):
            raise ValueError("slope vectors must be sign-homogeneous")
    th_lhs = tuple((lam + a) * np.abs(lam + a) / 2.0)
    lhs = sampled_busemann(field, BusemannQuery(th_lhs, tuple(xs)))
    if a == 0:
        return CheckResult(0.0, lhs.stabilized, "a=0: same route")
    th_rhs = tuple(lam * np.abs(lam) / 2.0)
    q2 = BusemannQuery(th_rhs, tuple(xs))
    t2_0 = default_depth0(xs)
    t2_max = t2_0 * 2 ** t2_doublings
    lo, hi, m1 = _coverage_for_dirs(th_rhs, xs, t2_max)
    wide = np.arange(np.floor(lo / field.step), np.ceil(hi / field.step) + 1) \
        * field.step
    stage1 = shear(field, a, wide, m1, strict=False)
    rhs = busemann(stage1.env, q2, t0=t2_0, max_doublings=t2_doublings)
    ok = lhs.stabilized and rhs.stabilized and stage1.stabilized
    return CheckResult(abs(lhs.value - rhs.value), ok,
                       f"lhs depth {lhs.trunc_depth:g}, rhs depth "
                       f"{rhs.trunc_depth:g}")


# ----------------------------------------------------------------------
# the law environment W of the Busemann process

def busemann_law_environment(field, theta, window, tol=STAB_TOL,
                             max_doublings=8):
    """k-line environment W with sum_{i<=l} W_i(x) = Busemann value of
    direction vector theta[:l] at x^l (minimal normalization).

    Returns (Environment, stabilized, depth).  Tail slopes are set to
    the law's drifts sqrt(2 theta_i).
    """
    theta = tuple(float(t) for t in theta)
    if any(t < 0 for t in theta) or any(theta[i] > theta[i + 1]
                                        for i in range(len(theta) - 1)):
        raise ValueError("theta must be nonnegative and nondecreasing")
    window = np.asarray(window, dtype=np.float64)
    k = len(theta)
    targets = np.union1d(window, [0.0])
    T = default_depth0(window)
    prev = None
    psums = None
    stabilized = False
    depth = T
    for step in range(max_doublings + 1):
        try:
            env = adequate_env(field, max(theta), T, float(targets.max()), k)
            cache = _CornerCache(env)
            psums = np.zeros((k + 1, targets.size))
            for ell in range(1, k + 1):
                th = theta[:ell]
                lines = _start_lines(th, T, ell)
                _require(env, T, max(lines), float(targets.max()))
                main = _term_common_end(env, cache, T, lines, targets)
                norm = _normalizers(env, cache, T, th, lines, "minimal")
                psums[ell] = main - norm
        except InsufficientEnvironmentError:
            if prev is None:
                raise
            break
        if prev is not None and np.max(np.abs(psums - prev)) <= tol:
            stabilized = True
            depth = T
            break
        prev = psums
        depth = T
        T *= 2.0
    widx = np.searchsorted(targets, window)
    lines = np.diff(psums, axis=0)[:, widx]
    drifts = np.sqrt(2.0 * np.asarray(theta))
    return Environment(window, lines, drifts), stabilized, depth


# ----------------------------------------------------------------------
# restricted (slit) Busemann identity

def check_restricted_busemann(field, k, x, y, theta, tol=STAB_TOL,
                              max_doublings=8):
    """Difference between the two routes of the slit identity:

    B^{(0^k, theta)}((x^k, y)) - B^{0^k}(x^k)   (multi-path route)
    vs the restricted single-path Busemann of direction theta at y with
    the slit left of x on lines 1..k, at matching truncation lines.
    """
    if x > y:
        raise ValueError("need x <= y")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if k > 2:
        raise ValueError("the multi-path route supports k <= 2 here")
    if k == 0:
        lhs = sampled_busemann(field, BusemannQuery((theta,), (y,)),
                               max_doublings=max_doublings)
        rhs = lhs
        return CheckResult(0.0, lhs.stabilized, "k=0: empty slit")
    qfull = BusemannQuery((0.0,) * k + (theta,), (x,) * k + (y,))
    qzero = BusemannQuery((0.0,) * k, (x,) * k)
    lhs_full = sampled_busemann(field, qfull, max_doublings=max_doublings)
    lhs_zero = sampled_busemann(field, qzero, max_doublings=max_doublings)
    lhs = lhs_full.value - lhs_zero.value

    # restricted route, start line floor(theta T) + k + 1 as in the
    # multi-path truncation
    T = default_depth0([x, y])
    prev = None
    val = np.nan
    stab = False
    for step in range(max_doublings + 1):
        line = int(np.floor(theta * T)) + k + 1
        try:
            env = adequate_env(field, theta, T, max(y, 0.0), k + 1)
            _require(env, T, line, max(y, 0.0))
        except InsufficientEnvironmentError:
            if prev is None:
                raise
            break
        main = restricted_profile(env, -T, line, (x, k), [y])[0]
        norm = lpp_profile(env, [-T], [line], [0.0])[0]
        val = float(main - norm)
        if prev is not None and abs(val - prev) <= tol:
            stab = True
            break
        prev = val
        T *= 2.0
    ok = lhs_full.stabilized and lhs_zero.stabilized and stab
    return CheckResult(abs(lhs - val), ok,
                       f"multi depth {lhs_full.trunc_depth:g}, "
                       f"restricted depth {T:g}")


# ----------------------------------------------------------------------
# CSV export

SAMPLE_COLUMNS = ["query_id", "theta", "xs", "value", "depth", "stabilized",
                  "lines_used", "seed"]


def write_samples_csv(rows, path):
    """Rows: (query_id, theta tuple, xs tuple, BusemannSample, seed)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SAMPLE_COLUMNS)
        for qid, theta, xs, s, seed in rows:
            w.writerow([qid,
                        " ".join(f"{t:.12g}" for t in theta),
                        " ".join(f"{v:.12g}" for v in xs),
                        f"{s.value:.12g}", f"{s.trunc_depth:.12g}",
                        int(s.stabilized), s.lines_used, seed])


def _stab_error(a, T):
    from .lpp import StabilizationError
    return StabilizationError(f"shear to drift {a:g} failed to stabilize "
                              f"(last depth {T:g})")
