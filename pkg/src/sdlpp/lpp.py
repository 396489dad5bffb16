"""Last passage values over piecewise-linear line environments.

Paths are nonincreasing right-continuous step functions between lines;
multi-path values maximize the summed lengths of disjoint k-tuples.
Because the environments are piecewise linear, every optimizer can be
taken to jump only at breakpoints or endpoint coordinates, so the
sweeps below are exact, not discretizations.

Solver layers (each checks the one below in the tests):

* ``brute_force_multi_lpp`` -- exhaustive enumeration, tiny instances,
* ``_reference_dp``  -- sparse dict DP with full state history, used
  for optimizer extraction,
* ``_sweep_single``  -- vectorized k=1 line sweep (plus the restricted
  variant used for slit LPP),
* ``_multipath_dp``  -- dense column sweep for k >= 2 (numba or numpy
  via _kernels), values only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, product

import numpy as np

from . import _kernels
from .env import eval_line

__all__ = [
    "Point", "EndpointPair", "Path", "InvalidEndpointError",
    "path_length", "lpp_value", "multi_lpp", "restricted_lpp",
    "lpp_from_minus_infinity", "check_metric_composition",
    "check_quadrangle", "brute_force_multi_lpp", "n_property_ok",
]

NEG_INF = -np.inf
VALUE_TOL = 1e-9


class InvalidEndpointError(ValueError):
    """No disjoint k-tuple exists between the requested endpoints."""


class StabilizationError(RuntimeError):
    """A doubling scheme failed to stabilize before its analytic cutoff."""


@dataclass(frozen=True)
class Point:
    x: float
    n: int


@dataclass(frozen=True)
class Path:
    """A single path from (x, n) to (y, m), stored by exit times.

    exit_times[j] is the time the path leaves line n - j; the last
    entry (exit from line m) always equals y.
    """
    x: float
    n: int
    y: float
    m: int
    exit_times: tuple

    def __post_init__(self):
        if self.n < self.m:
            raise ValueError("path start line must be >= end line")
        e = np.asarray(self.exit_times, dtype=np.float64)
        if e.shape != (self.n - self.m + 1,):
            raise ValueError("need one exit time per line n..m")
        if (abs(e[-1] - self.y) > 0 or np.any(np.diff(e) < 0)
                or e[0] < self.x or self.y < e[-1]):
            raise ValueError("malformed exit times")

    def pairs(self):
        return [(self.n - j, float(self.exit_times[j]))
                for j in range(len(self.exit_times))]

    def exit(self, line):
        return float(self.exit_times[self.n - line])

    def line_at(self, t):
        """pi(t): the line occupied at time t (right-continuous)."""
        if not self.x <= t <= self.y:
            raise ValueError("t outside path domain")
        for j, e in enumerate(self.exit_times):
            if t < e:
                return self.n - j
        return self.m

    def weakly_left_of(self, other):
        return all(a <= b + 1e-12 for a, b in zip(self.exit_times, other.exit_times))


@dataclass(frozen=True)
class EndpointPair:
    xs: tuple
    ns: tuple
    ys: tuple
    ms: tuple

    def __post_init__(self):
        k = len(self.xs)
        if not (k >= 1 and len(self.ns) == len(self.ys) == len(self.ms) == k):
            raise ValueError("endpoint vectors must share a length >= 1")
        for v in (self.xs, self.ys):
            if any(v[i] > v[i + 1] for i in range(k - 1)):
                raise InvalidEndpointError("endpoint coordinates must be nondecreasing")
        for v in (self.ns, self.ms):
            if any(v[i] > v[i + 1] for i in range(k - 1)):
                raise InvalidEndpointError("endpoint lines must be nondecreasing")
        for i in range(k):
            if self.ns[i] < self.ms[i]:
                raise InvalidEndpointError("start line below end line")
            if self.xs[i] > self.ys[i]:
                raise InvalidEndpointError("start coordinate right of end coordinate")

    @property
    def k(self):
        return len(self.xs)

    @classmethod
    def common_lines(cls, xs, n, ys, m):
        k = len(xs)
        return cls(tuple(float(x) for x in xs), (int(n),) * k,
                   tuple(float(y) for y in ys), (int(m),) * k)


def pair_feasible(pair, n_lines):
    """Combinatorial existence check for a disjoint k-tuple.

    Proper paths i < j whose open intervals overlap (with every path
    between them proper, so the ordering chain is unbroken) must fit
    j - i extra lines between m_i and n_j.  Zero-width paths carry no
    constraints.
    """
    k = pair.k
    if max(pair.ns) > n_lines or min(pair.ms) < 1:
        return False
    proper = [pair.xs[i] < pair.ys[i] for i in range(k)]
    for i in range(k):
        if not proper[i]:
            continue
        for j in range(i + 1, k):
            if not proper[j]:
                continue
            if not all(proper[l] for l in range(i, j + 1)):
                break  # a ghost splits the chain; j and beyond unconstrained vs i
            if pair.xs[j] < pair.ys[i] and pair.ns[j] - pair.ms[i] < j - i:
                return False
    return True


def path_length(env, path):
    """Sum over lines of f_i(exit from i) - f_i(entry into i)."""
    total = 0.0
    entry = path.x
    for line, ex in path.pairs():
        total += eval_line(env, line, ex) - eval_line(env, line, entry)
        entry = ex
    return total


# ----------------------------------------------------------------------
# shared helpers

def _columns(env, coords):
    pts = np.asarray(coords, dtype=np.float64)
    g = env.grid
    inner = g[(g >= pts.min()) & (g <= pts.max())]
    return np.union1d(inner, pts)


def _line_values(env, n_top, cols):
    """Values of lines 1..n_top at the columns (linear tails included)."""
    out = np.empty((n_top, cols.size))
    for ln in range(1, n_top + 1):
        out[ln - 1] = env.line(ln)(cols)
    return out


def _split_ghosts(pair):
    """Separate zero-width paths; return (ghosts, blocks of proper paths)."""
    paths = list(zip(pair.xs, pair.ns, pair.ys, pair.ms))
    ghosts = [(j, p) for j, p in enumerate(paths) if p[0] == p[2]]
    blocks = []
    cur = []
    for j, p in enumerate(paths):
        if p[0] == p[2]:
            if cur:
                blocks.append(cur)
            cur = []
        else:
            cur.append((j, p))
    if cur:
        blocks.append(cur)
    return ghosts, blocks


# ----------------------------------------------------------------------
# k = 1 sweep (vectorized, exact)

def _sweep_single(values, cols, ix, n, m, forbid=None):
    """Single-path DP from (cols[ix], n) down to line m.

    values[r] holds line r+1 at the columns.  Returns the profile
    V(c) = value of the best path from (cols[ix], n) to (c, m) over all
    columns c >= cols[ix].  ``forbid=(icut, k0)`` bans lines <= k0 at
    columns left of index icut.
    """
    T = cols.size
    V = np.full(T, NEG_INF)
    row = values[n - 1]
    V[ix:] = row[ix:] - row[ix]
    if forbid is not None and n <= forbid[1]:
        V[:forbid[0]] = NEG_INF
    for line in range(n - 1, m - 1, -1):
        row = values[line - 1]
        W = V - row
        np.maximum.accumulate(W, out=W)
        V = W + row
        if forbid is not None and line <= forbid[1]:
            V[:forbid[0]] = NEG_INF
    return V


# ----------------------------------------------------------------------
# k >= 2 dense sweep (values only)

def _insert_axis(V, axes, pos, line, axis_lines):
    idx = int(np.searchsorted(axis_lines, line))
    newshape = list(V.shape)
    newshape.insert(pos, axis_lines.size)
    W = np.full(newshape, NEG_INF)
    sl = [slice(None)] * len(newshape)
    sl[pos] = idx
    W[tuple(sl)] = V
    axes.insert(pos, axis_lines)
    if len(axes) > 1:
        W = np.where(_kernels._strict_mask(axes), W, NEG_INF)
    return W


def _multipath_dp(env, paths, profile=False):
    """Dense DP over proper paths (x < y each); returns (value, cols, prof).

    With profile=True (all paths share start column, ends on line 1)
    the relaxed bottom-state value is recorded per column: prof[t] is
    the value of ending every path at (cols[t], 1).
    """
    k = len(paths)
    coords = [p[0] for p in paths] + [p[2] for p in paths]
    cols = _columns(env, coords)
    T = cols.size
    n_top = max(p[1] for p in paths)
    vals = _line_values(env, n_top, cols)
    DF_all = np.zeros_like(vals)
    DF_all[:, 1:] = np.diff(vals, axis=1)

    def cidx(c):
        return int(np.searchsorted(cols, c))

    acts, deacts = {}, {}
    for j, (x, n, y, m) in enumerate(paths):
        acts.setdefault(cidx(x), []).append(j)
        deacts.setdefault(cidx(y), []).append(j)

    axis_lines = [np.arange(p[3], p[1] + 1, dtype=np.int64) for p in paths]
    dfs = [np.ascontiguousarray(DF_all[p[3] - 1: p[1], :]) for p in paths]

    V = np.zeros(())
    axes, active = [], []
    prof = np.full(T, NEG_INF) if profile else None

    def bottom_idx():
        if len(active) != k:
            return None
        return tuple(int(np.searchsorted(axes[r], r + 1)) for r in range(k))

    # state after processing column t = increments into t, relaxation,
    # then the events scheduled at t
    last = -1
    for ec in sorted(set(acts) | set(deacts)) + [T]:
        hi = min(ec, T - 1)
        if hi > last and active:
            V = np.ascontiguousarray(V)
            V = _kernels.run_segment(V, [dfs[j] for j in active], axes,
                                     last + 1, hi + 1,
                                     bottom_idx() if prof is not None else None,
                                     prof)
        if ec >= T:
            break
        V = _kernels.relax(np.asarray(V, dtype=np.float64), axes)
        if prof is not None and (b := bottom_idx()) is not None:
            prof[ec] = max(prof[ec], float(V[b]))
        dropped = False
        for j in sorted(deacts.get(ec, []), reverse=True):
            pos = active.index(j)
            V = V.max(axis=pos)
            axes.pop(pos)
            active.pop(pos)
            dropped = True
        if dropped and active:
            # other paths may legally land on a freed line at this instant
            V = _kernels.relax(np.asarray(V, dtype=np.float64), axes)
        for j in sorted(acts.get(ec, [])):
            pos = int(np.searchsorted(np.asarray(active, dtype=np.int64), j)) \
                if active else 0
            V = _insert_axis(np.asarray(V, dtype=np.float64), axes, pos,
                             paths[j][1], axis_lines[j])
            active.insert(pos, j)
            V = _kernels.relax(V, axes)
        last = ec
    value = float(V) if np.ndim(V) == 0 else NEG_INF
    return value, cols, prof


# ----------------------------------------------------------------------
# sparse reference DP with optimizer extraction

_REF_STATE_BUDGET = 2_000_000


def _reference_dp(env, paths, leftmost=True):
    """Dict-state DP over proper paths with optimizer reconstruction.

    Returns (value, exits) where exits[j] maps line -> exit time for
    path j.  Stores the full stage history, so only for moderate sizes.
    """
    k = len(paths)
    coords = [p[0] for p in paths] + [p[2] for p in paths]
    cols = _columns(env, coords)
    T = cols.size
    n_top = max(p[1] for p in paths)
    if T * (n_top ** k) > _REF_STATE_BUDGET:
        raise ValueError("instance too large for optimizer extraction")
    vals = _line_values(env, n_top, cols)

    def cidx(c):
        return int(np.searchsorted(cols, c))

    acts, deacts = {}, {}
    for j, (x, n, y, m) in enumerate(paths):
        acts.setdefault(cidx(x), []).append(j)
        deacts.setdefault(cidx(y), []).append(j)

    def drop_targets(state, actv):
        ranges = [range(paths[j][3], state[pos] + 1)
                  for pos, j in enumerate(actv)]
        return [tup for tup in product(*ranges)
                if all(tup[i] < tup[i + 1] for i in range(len(tup) - 1))]

    # forward pass, recording (kind, info, table_before, active_before)
    stages = []
    V = {(): 0.0}
    active = []
    for t in range(T):
        if t > 0 and active:
            stages.append(("inc", t, dict(V), list(active)))
            V = {s: v + sum(vals[s[p] - 1, t] - vals[s[p] - 1, t - 1]
                            for p in range(len(s))) for s, v in V.items()}
        if active:
            stages.append(("relax", t, dict(V), list(active)))
            W = {}
            for s, v in V.items():
                for s2 in drop_targets(s, active):
                    if W.get(s2, NEG_INF) < v:
                        W[s2] = v
            V = W
        deacted = False
        for j in sorted(deacts.get(t, []), reverse=True):
            pos = active.index(j)
            stages.append(("deact", (t, j, pos), dict(V), list(active)))
            W = {}
            for s, v in V.items():
                s2 = s[:pos] + s[pos + 1:]
                if W.get(s2, NEG_INF) < v:
                    W[s2] = v
            V = W
            active.pop(pos)
            deacted = True
        if deacted and active:
            stages.append(("relax", t, dict(V), list(active)))
            W = {}
            for s, v in V.items():
                for s2 in drop_targets(s, active):
                    if W.get(s2, NEG_INF) < v:
                        W[s2] = v
            V = W
        for j in sorted(acts.get(t, [])):
            pos = int(np.searchsorted(np.asarray(active, dtype=np.int64), j)) \
                if active else 0
            stages.append(("act", (t, j, pos), dict(V), list(active)))
            W = {}
            nj = paths[j][1]
            for s, v in V.items():
                s2 = s[:pos] + (nj,) + s[pos:]
                if all(s2[i] < s2[i + 1] for i in range(len(s2) - 1)):
                    if W.get(s2, NEG_INF) < v:
                        W[s2] = v
            active.insert(pos, j)
            V = W
            stages.append(("relax", t, dict(V), list(active)))
            W = {}
            for s, v in V.items():
                for s2 in drop_targets(s, active):
                    if W.get(s2, NEG_INF) < v:
                        W[s2] = v
            V = W
    if () not in V:
        raise InvalidEndpointError("no disjoint k-tuple exists between the endpoints")
    value = V[()]

    # Backward reconstruction.  No arithmetic happens on the value: at
    # each stage the state is re-chosen among the exact argmax of the
    # stored table, so floats never drift.  Lexicographic tie-breaking
    # realizes the pointwise-extreme (leftmost/rightmost) optimizer.
    exits = [dict() for _ in range(k)]

    def record_drop(j, from_line, to_line, time):
        for ln in range(to_line + 1, from_line + 1):
            exits[j][ln] = float(time)

    state = ()
    for kind, info, table, actv in reversed(stages):
        if kind == "inc":
            continue  # state unchanged; the stored table carries the value
        if kind == "relax":
            t = info
            cands = [s for s in table
                     if all(a >= b for a, b in zip(s, state))]
            top = max(table[s] for s in cands)
            cands = [s for s in cands if table[s] == top]
            pick = (min if leftmost else max)(cands)
            for pos, j in enumerate(actv):
                if pick[pos] > state[pos]:
                    record_drop(j, pick[pos], state[pos], cols[t])
            state = pick
        elif kind == "deact":
            t, j, pos = info
            mj = paths[j][3]
            cands = [s for s in table
                     if len(s) == len(state) + 1 and s[:pos] + s[pos + 1:] == state]
            top = max(table[s] for s in cands)
            cands = [s for s in cands if table[s] == top]
            pick = (min if leftmost else max)(cands)
            record_drop(j, pick[pos], mj - 1, cols[t])  # final exits at y_j
            state = pick
        elif kind == "act":
            t, j, pos = info
            assert state[pos] == paths[j][1]
            state = state[:pos] + state[pos + 1:]
    return value, exits


# ----------------------------------------------------------------------
# public operations

def _build_paths(pair):
    return list(zip(pair.xs, pair.ns, pair.ys, pair.ms))


def multi_lpp(env, pair, want_optimizer=False):
    """Multi-path last passage value f[p -> q]; optionally the leftmost
    optimizer (as a tuple of Path objects)."""
    if not pair_feasible(pair, env.n_lines):
        raise InvalidEndpointError("no disjoint k-tuple exists between the endpoints")
    ghosts, blocks = _split_ghosts(pair)
    total = 0.0
    exits_by_path = {}
    for j, (x, n, y, m) in ghosts:
        exits_by_path[j] = {ln: x for ln in range(m, n + 1)}
    for block in blocks:
        paths = [p for _, p in block]
        if want_optimizer:
            val, exits = _reference_dp(env, paths, leftmost=True)
            for (j, _), e in zip(block, exits):
                exits_by_path[j] = e
        elif len(paths) == 1:
            x, n, y, m = paths[0]
            cols = _columns(env, [x, y])
            vals = _line_values(env, n, cols)
            prof = _sweep_single(vals, cols, int(np.searchsorted(cols, x)), n, m)
            val = float(prof[int(np.searchsorted(cols, y))])
            if not np.isfinite(val):
                raise InvalidEndpointError("no path between the endpoints")
        else:
            val, _, _ = _multipath_dp(env, paths)
            if not np.isfinite(val):
                raise InvalidEndpointError(
                    "no disjoint k-tuple exists between the endpoints")
        total += val
    if not want_optimizer:
        return total, None
    tup = []
    for j in range(pair.k):
        x, n, y, m = pair.xs[j], pair.ns[j], pair.ys[j], pair.ms[j]
        e = exits_by_path[j]
        e[m] = y  # exit from the final line is the endpoint itself
        times = tuple(float(e[ln]) for ln in range(n, m - 1, -1))
        tup.append(Path(x, n, y, m, times))
    return total, tuple(tup)


def lpp_value(env, p, q, want_optimizer=False):
    """Single-path last passage value f[(p.x, p.n) -> (q.x, q.n)]."""
    if q.x < p.x or q.n > p.n:
        raise InvalidEndpointError("need q.x >= p.x and q.n <= p.n")
    pair = EndpointPair((p.x,), (p.n,), (q.x,), (q.n,))
    val, opt = multi_lpp(env, pair, want_optimizer=want_optimizer)
    return (val, opt[0] if opt else None) if want_optimizer else (val, None)


def lpp_profile(env, start_xs, start_lines, targets):
    """Values f[(start) -> (c^k, 1)] for every c in ``targets``.

    All paths end at a common coordinate on line 1; one sweep serves
    every target.  Used by the Busemann estimators.
    """
    k = len(start_lines)
    targets = np.asarray(targets, dtype=np.float64)
    hi = float(targets.max())
    if k == 1:
        cols = _columns(env, [start_xs[0], hi] + list(targets))
        vals = _line_values(env, start_lines[0], cols)
        prof = _sweep_single(vals, cols, int(np.searchsorted(cols, start_xs[0])),
                             start_lines[0], 1)
        return prof[np.searchsorted(cols, targets)]
    paths = [(start_xs[j], start_lines[j], hi, 1) for j in range(k)]
    _, cols, prof = _multipath_dp(env, paths, profile=True)
    return prof[np.searchsorted(cols, targets)]


def restricted_lpp(env, p, q, forbidden):
    """Single-path LPP avoiding D = (-inf, x0) x {1..k0}."""
    x0, k0 = forbidden
    if q.x < p.x or q.n > p.n:
        raise InvalidEndpointError("need q.x >= p.x and q.n <= p.n")
    if p.n <= k0 and p.x < x0:
        raise InvalidEndpointError("start point lies in the forbidden region")
    if q.n <= k0 and q.x < x0:
        raise InvalidEndpointError("end point lies in the forbidden region")
    cols = _columns(env, [p.x, q.x, x0])
    vals = _line_values(env, p.n, cols)
    icut = int(np.searchsorted(cols, x0))
    prof = _sweep_single(vals, cols, int(np.searchsorted(cols, p.x)), p.n, q.n,
                         forbid=(icut, k0))
    val = float(prof[int(np.searchsorted(cols, q.x))])
    if not np.isfinite(val):
        raise InvalidEndpointError("no admissible path avoids the forbidden region")
    return val


def restricted_profile(env, start_x, start_line, forbidden, targets):
    """Restricted single-path values to (c, 1) for every target c."""
    x0, k0 = forbidden
    targets = np.asarray(targets, dtype=np.float64)
    cols = _columns(env, [start_x, x0, float(targets.max())] + list(targets))
    vals = _line_values(env, start_line, cols)
    icut = int(np.searchsorted(cols, x0))
    prof = _sweep_single(vals, cols, int(np.searchsorted(cols, start_x)),
                         start_line, 1, forbid=(icut, k0))
    return prof[np.searchsorted(cols, targets)]


# ----------------------------------------------------------------------
# last passage from -infinity

def n_property_ok(m_vec, slopes, tol=1e-12):
    """Directional existence condition for last passage from -infinity:
    whenever line m is used but m-1 is not, the slope must strictly
    increase across the gap."""
    mset = set(int(m) for m in m_vec)
    for m in mset:
        if m > 1 and (m - 1) not in mset:
            if not slopes[m - 2] < slopes[m - 1] - tol:
                return False
    return True


def lpp_from_minus_infinity(env, m_vec, xs):
    """lim_{t -> -inf} f[(t, m) -> (x, 1)] + sum_i f_{m_i}(t), exactly.

    Evaluates at t = x_left - Delta for doubling Delta; linear tails
    make the value exactly constant once the optimizer's tail structure
    freezes, so two agreeing evaluations certify the limit.  An
    analytic cutoff caps the doubling: beyond range/gap the tail can no
    longer reorder optimizers, so failure to stabilize is a bug.
    """
    m_vec = [int(m) for m in m_vec]
    if any(m_vec[i] >= m_vec[i + 1] for i in range(len(m_vec) - 1)):
        raise ValueError("start line vector must be strictly increasing")
    slopes = env.slopes
    if not n_property_ok(m_vec, slopes):
        raise ValueError("slope condition fails: the limit need not exist")
    xs = np.asarray(xs, dtype=np.float64)
    k = len(m_vec)
    if xs.shape != (k,) or np.any(np.diff(xs) < 0):
        raise ValueError("need a nondecreasing coordinate per start line")

    # analytic cutoff: value range over the grid / smallest strict slope
    # gap at the block boundaries of m_vec
    vr = float(env.values.max() - env.values.min()) + 1.0
    gaps = [slopes[m - 1] - slopes[m - 2]
            for m in set(m_vec) if m > 1 and (m - 1) not in set(m_vec)]
    gap = min(gaps) if gaps else 1.0
    cutoff = 8.0 * vr / max(gap, 1e-9) + 8.0 * (env.grid[-1] - env.grid[0])

    x_left = min(env.grid[0], xs.min())
    delta = max(1.0, (env.grid[-1] - env.grid[0]) / 4.0)
    prev = None
    while True:
        t = x_left - delta
        pair = EndpointPair((t,) * k, tuple(m_vec), tuple(xs), (1,) * k)
        val, _ = multi_lpp(env, pair)
        val += sum(eval_line(env, m, t) for m in m_vec)
        if prev is not None and abs(val - prev) <= 1e-12 * max(1.0, abs(val)):
            return val
        prev = val
        delta *= 2.0
        if delta > 2 * cutoff:
            raise StabilizationError(
                "last passage from -infinity failed to stabilize before the "
                "analytic cutoff; this indicates an internal error")


# ----------------------------------------------------------------------
# identity checks

def check_metric_composition(env, pair, ell, tol=VALUE_TOL):
    """Split f[p -> q] across line ell: equality with the max over
    nondecreasing k-tuples z of f[p -> (z, ell)] + f[(z, ell-1) -> q]."""
    if not (max(pair.ms) + 1 <= ell <= min(pair.ns)):
        raise ValueError("split line out of range")
    base, _ = multi_lpp(env, pair)
    cols = _columns(env, list(pair.xs) + list(pair.ys))
    zcands = cols[(cols >= pair.xs[-1]) & (cols <= pair.ys[0])]
    best = NEG_INF
    k = pair.k
    for z in combinations_with_replacement(zcands, k):
        try:
            a, _ = multi_lpp(env, EndpointPair(pair.xs, pair.ns, z, (ell,) * k))
            b, _ = multi_lpp(env, EndpointPair(z, (ell - 1,) * k, pair.ys, pair.ms))
        except InvalidEndpointError:
            continue
        best = max(best, a + b)
    return abs(base - best) <= tol


def check_quadrangle(env, pair_a, pair_b, tol=VALUE_TOL):
    """f[p -> q'] + f[p' -> q] <= f[p -> q] + f[p' -> q'] + tol."""
    cross1 = EndpointPair(pair_a.xs, pair_a.ns, pair_b.ys, pair_b.ms)
    cross2 = EndpointPair(pair_b.xs, pair_b.ns, pair_a.ys, pair_a.ms)
    lhs = multi_lpp(env, cross1)[0] + multi_lpp(env, cross2)[0]
    rhs = multi_lpp(env, pair_a)[0] + multi_lpp(env, pair_b)[0]
    return lhs <= rhs + tol


# ----------------------------------------------------------------------
# brute force oracle

def brute_force_multi_lpp(env, pair):
    """Exhaustive maximum over jump-time assignments on tiny instances.

    Enumerates, for each path, all nondecreasing exit-time tuples drawn
    from breakpoints and endpoint coordinates, then filters k-tuples by
    the pointwise disjointness definition.  Guarded to stay tiny.
    """
    if env.grid.size > 12 or pair.k > 2 or env.n_lines > 4:
        raise ValueError("instance too large for the brute-force oracle")
    if not pair_feasible(pair, env.n_lines):
        raise InvalidEndpointError("no disjoint k-tuple exists between the endpoints")
    cols = _columns(env, list(pair.xs) + list(pair.ys))

    def candidate_paths(x, n, y, m):
        cand = cols[(cols >= x) & (cols <= y)]
        levels = n - m  # free exits for lines n..m+1; exit from m is y
        out = []
        for tup in combinations_with_replacement(cand, levels):
            out.append(Path(x, n, y, m, tuple(tup) + (y,)))
        return out

    per_path = [candidate_paths(*p) for p in
                zip(pair.xs, pair.ns, pair.ys, pair.ms)]

    def disjoint(pa, pb):
        lo = max(pa.x, pb.x)
        hi = min(pa.y, pb.y)
        if lo >= hi:
            return True
        probes = set([lo, hi])
        for e in list(pa.exit_times) + list(pb.exit_times):
            if lo <= e <= hi:
                probes.add(e)
        probes = sorted(probes)
        checks = []
        for a, b in zip(probes[:-1], probes[1:]):
            checks.append(0.5 * (a + b))
        for e in probes:
            if lo < e < hi:
                checks.append(e)  # right-continuous value at the jump
        return all(pa.line_at(t) < pb.line_at(t) for t in checks)

    best = NEG_INF
    for combo in product(*per_path):
        ok = all(disjoint(combo[i], combo[i + 1]) for i in range(len(combo) - 1))
        if ok:
            best = max(best, sum(path_length(env, p) for p in combo))
    if best == NEG_INF:
        raise InvalidEndpointError("no disjoint k-tuple exists between the endpoints")
    return best
