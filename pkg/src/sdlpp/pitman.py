"""Pitman sorting operators and the double sorting monoid action.

The two-line Pitman operator reflects line 1 off line 2 through a
running supremum and swaps their asymptotic slopes; generators act on
adjacent line pairs, barred generators are the reflection conjugates.
Words act right-to-left.  The environment representation is exact:
running suprema insert their true kink locations, so monoid identities
hold at float precision rather than at grid resolution.

Also here: the full reverse-sort (RSK) map and its inverse, orbit
target vectors, zig-zag last passage values, and the corner sorting
(melon) used by the Busemann estimators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import env as envmod
from .env import SLOPE_TOL, from_plfs
from .plf import PLF

__all__ = [
    "Generator", "MonoidWord", "parse_word", "pitman2", "copitman2",
    "apply_word", "basic_action", "rsk", "rsk_inverse",
    "orbit_target_vector", "zigzag_lpp", "zigzag_top_line",
    "zigzag_word", "corner_sort", "bubble_word",
]


@dataclass(frozen=True)
class Generator:
    index: int
    barred: bool = False

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("generator index must be >= 1")

    def __str__(self):
        return f"{'T' if self.barred else 't'}{self.index}"


@dataclass(frozen=True)
class MonoidWord:
    """A word in the sorting generators, leftmost factor applied last."""
    gens: tuple

    def __post_init__(self):
        for g in self.gens:
            if not isinstance(g, Generator):
                raise TypeError("MonoidWord holds Generator objects")

    def __str__(self):
        return " ".join(str(g) for g in self.gens)

    def __len__(self):
        return len(self.gens)

    def max_index(self):
        return max((g.index for g in self.gens), default=0)


_TOKEN = re.compile(r"^([tT])(\d+)$")


def parse_word(text):
    """Parse words like "t1 T2 t1" (t = plain, T = barred)."""
    gens = []
    for tok in text.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad generator token {tok!r}")
        gens.append(Generator(int(m.group(2)), m.group(1) == "T"))
    return MonoidWord(tuple(gens))


# ----------------------------------------------------------------------
# two-line operators

def _pitman_pair(f1, f2, l1, l2):
    """Unrestricted Pitman on a pair with l1 < l2 (caller checks)."""
    S = (f2 - f1).cummax_left()
    return f1 + S, f2 - S


def pitman2(env):
    """Two-line Pitman operator; identity when slopes already sorted down."""
    if env.n_lines != 2:
        raise ValueError("pitman2 acts on two-line environments")
    l1, l2 = env.slopes
    if not l2 - l1 > SLOPE_TOL:
        return env
    f1, f2 = env.plfs()
    g1, g2 = _pitman_pair(f1, f2, l1, l2)
    return from_plfs([g1, g2], slopes=[l2, l1])


def copitman2(env):
    """Two-line co-Pitman operator (the [x, inf) mirror); identity when
    slopes already sorted up.  Equals reflect . pitman2 . reflect."""
    if env.n_lines != 2:
        raise ValueError("copitman2 acts on two-line environments")
    l1, l2 = env.slopes
    if not l1 - l2 > SLOPE_TOL:
        return env
    f1, f2 = env.plfs()
    S = (f2 - f1).cummax_right()
    return from_plfs([f1 + S, f2 - S], slopes=[l2, l1])


# ----------------------------------------------------------------------
# monoid action

def basic_action(slopes, word):
    """The sorting action on slope vectors: t_i swaps an ascending pair,
    T_i swaps a descending pair."""
    lam = [float(s) for s in slopes]
    n = len(lam)
    if word.max_index() > n - 1:
        raise IndexError("generator index out of range for this dimension")
    for g in reversed(word.gens):
        i = g.index - 1
        a, b = lam[i], lam[i + 1]
        if (not g.barred and b - a > SLOPE_TOL) or (g.barred and a - b > SLOPE_TOL):
            lam[i], lam[i + 1] = b, a
    return np.asarray(lam)


def apply_word(env, word):
    """Apply the monoid word to the environment (rightmost factor first)."""
    if word.max_index() > env.n_lines - 1:
        raise IndexError("generator index out of range for this environment")
    fs = env.plfs()
    lam = [float(s) for s in env.slopes]
    for g in reversed(word.gens):
        i = g.index - 1
        a, b = lam[i], lam[i + 1]
        if not g.barred:
            if b - a > SLOPE_TOL:
                S = (fs[i + 1] - fs[i]).cummax_left()
                fs[i], fs[i + 1] = fs[i] + S, fs[i + 1] - S
                lam[i], lam[i + 1] = b, a
        else:
            if a - b > SLOPE_TOL:
                S = (fs[i + 1] - fs[i]).cummax_right()
                fs[i], fs[i + 1] = fs[i] + S, fs[i + 1] - S
                lam[i], lam[i + 1] = b, a
    return from_plfs(fs, slopes=lam)


def bubble_word(n, barred=False):
    """(t1)(t2 t1)...(t_{n-1} ... t1): a full reverse-sort word."""
    gens = []
    for j in range(1, n):
        gens.extend(Generator(i, barred) for i in range(j, 0, -1))
    return MonoidWord(tuple(gens))


def rsk(env):
    """The orbit element with reversed slopes (nondecreasing input)."""
    lam = env.slopes
    if np.any(np.diff(lam) < -SLOPE_TOL):
        raise ValueError("rsk requires nondecreasing tail slopes")
    return apply_word(env, bubble_word(env.n_lines))


def rsk_inverse(env):
    """Inverse of rsk: reflect . rsk . reflect (nonincreasing input)."""
    lam = env.slopes
    if np.any(np.diff(lam) > SLOPE_TOL):
        raise ValueError("rsk_inverse requires nonincreasing tail slopes")
    return envmod.reflect(rsk(envmod.reflect(env)))


def orbit_target_vector(lam_f, lam_g, k):
    """The start-line vector m identifying sum(g_1..g_k) as a last
    passage value from -infinity across f.

    Greedy minimal-index matching of the first k slopes of g inside the
    (nondecreasing) slope list of f; the result is the unique vector
    satisfying the directional existence condition.
    """
    lam_f = [float(v) for v in lam_f]
    lam_g = [float(v) for v in lam_g]
    n = len(lam_f)
    if len(lam_g) != n:
        raise ValueError("slope vectors must share a length")
    if any(lam_f[i] - lam_f[i + 1] > SLOPE_TOL for i in range(n - 1)):
        raise ValueError("f slopes must be nondecreasing")
    if not (1 <= k <= n):
        raise ValueError("k out of range")
    if sorted(lam_g) != sorted(lam_f):
        # tolerance-based multiset comparison
        a, b = np.sort(lam_f), np.sort(lam_g)
        if np.max(np.abs(a - b)) > SLOPE_TOL:
            raise ValueError("g slopes are not a permutation of f slopes")
    used = [False] * n
    out = []
    for i in range(k):
        for j in range(n):
            if not used[j] and abs(lam_f[j] - lam_g[i]) <= SLOPE_TOL:
                used[j] = True
                out.append(j + 1)
                break
        else:
            raise ValueError("g slopes are not a permutation of f slopes")
    return tuple(sorted(out))


# ----------------------------------------------------------------------
# zig-zag last passage

def _dir_ok(ch):
    if ch not in ("<=", ">="):
        raise ValueError("zigzag pattern entries must be '<=' or '>='")
    return ch


def zigzag_lpp(env, p, q, pattern):
    """Zig-zag last passage value from (p.x, p.n) to (q.x, q.n).

    pattern[i] (for lines q.n <= i <= p.n) constrains the entry into
    line i against the exit from it: '<=' is the standard nonincreasing
    path direction (entry left of exit), '>=' reverses the level.  The
    all-'<=' pattern is plain last passage.  Raises if a reversed level
    makes the supremum infinite (unbounded linear tail).
    """
    n, m = p.n, q.n
    if n < m:
        raise ValueError("start line must be >= end line")
    for i in range(m, n + 1):
        _dir_ok(pattern[i])
    fs = {i: env.line(i) for i in range(m, n + 1)}
    # F(z) = best value of levels n..i given exit-from-level-i at z;
    # lo/hi bound the domain where F is meaningful
    f_n = fs[n]
    F = f_n - f_n(p.x)
    lo, hi = (p.x, None) if pattern[n] == "<=" else (None, p.x)
    for i in range(n - 1, m - 1, -1):
        G = F - fs[i]
        lo, hi, S = _bounded_cummax(lo, hi, G, pattern[i])
        F = S + fs[i]
    if (lo is not None and q.x < lo) or (hi is not None and q.x > hi):
        raise ValueError("no admissible zig-zag chain reaches the endpoint")
    return float(F(q.x))


def _bounded_cummax(lo, hi, g, direction):
    """Directional sup of a domain-bounded PLF; returns (lo, hi, plf).

    g is meaningful on [lo, hi] (None = unbounded); the result of
    sup over z' <= z ('<=') or z' >= z ('>=') within the domain.
    Unbounded suprema raise ValueError.
    """
    if direction == "<=":
        if lo is not None:
            return lo, None, _clamp_left(g, lo).cummax_left(left_tail=False)
        if hi is not None:
            g2 = _clamp_right(g, hi)
            if g2.sl < -SLOPE_TOL:
                raise ValueError("zig-zag supremum diverges on the left tail")
            return None, None, g2.cummax_left()
        if g.sl < -SLOPE_TOL:
            raise ValueError("zig-zag supremum diverges on the left tail")
        return None, None, g.cummax_left()
    if hi is not None:
        return None, hi, _clamp_right(g, hi).cummax_right(right_tail=False)
    if lo is not None:
        g2 = _clamp_left(g, lo)
        if g2.sr > SLOPE_TOL:
            raise ValueError("zig-zag supremum diverges on the right tail")
        return None, None, g2.cummax_right()
    if g.sr > SLOPE_TOL:
        raise ValueError("zig-zag supremum diverges on the right tail")
    return None, None, g.cummax_right()


def _clamp_left(g, lo):
    """Restrict to [lo, inf): constant continuation on the left."""
    bp = np.union1d(g.bp, [lo])
    vals = PLF(g.bp, g.vals, g.sl, g.sr, _checked=True)(bp)
    keep = bp >= lo
    return PLF(bp[keep], vals[keep], 0.0, g.sr, _checked=True)


def _clamp_right(g, hi):
    """Restrict to (-inf, hi]: constant continuation on the right."""
    bp = np.union1d(g.bp, [hi])
    vals = PLF(g.bp, g.vals, g.sl, g.sr, _checked=True)(bp)
    keep = bp <= hi
    return PLF(bp[keep], vals[keep], g.sl, 0.0, _checked=True)


def zigzag_word(pattern_list):
    """Word realizing the unanchored zig-zag top line: entry '<=' at
    slot i gives t_i, '>=' gives T_i; rightmost (deepest) applied first."""
    gens = tuple(Generator(i + 1, _dir_ok(p) == ">=")
                 for i, p in enumerate(pattern_list))
    return MonoidWord(gens)


def zigzag_top_line(env, pattern_list):
    """g_1(x) + sup over chains y_2 .. y_k of sum g_i(y_i) - g_{i-1}(y_i),
    where pattern_list[i-2] constrains y_i against y_{i-1}.

    This is the unanchored zig-zag value; equals the top line of the
    corresponding word applied to the environment.  Returns a PLF.
    """
    k = len(pattern_list) + 1
    if k > env.n_lines:
        raise ValueError("pattern longer than the environment")
    fs = [env.line(i) for i in range(1, k + 1)]
    H = None  # running sup of the tail of the chain, as a function of y_i
    for i in range(k, 1, -1):
        term = fs[i - 1] - fs[i - 2]
        G = term if H is None else term + H
        direction = pattern_list[i - 2]
        if direction == "<=":
            if G.sl < -SLOPE_TOL:
                raise ValueError("zig-zag supremum diverges on the left tail")
            H = G.cummax_left()
        else:
            if G.sr > SLOPE_TOL:
                raise ValueError("zig-zag supremum diverges on the right tail")
            H = G.cummax_right()
    return fs[0] if H is None else fs[0] + H


# ----------------------------------------------------------------------
# corner sorting (melon): the nonintersecting version of the first m
# lines started at t0, whose partial sums are the multi-path last
# passage values from the bottom corner (t0^k, m) to (x^k, 1).

def corner_sort(env, t0, m, prune_tol=0.0):
    """Sort lines 1..m of env on [t0, inf) into a nonintersecting stack.

    Returns a list of m PLFs W with
        sum_{i<=k} W_i(x) = env[(t0^k, m) -> (x^k, 1)]   for all k <= m.
    A tiny prune tolerance keeps deep sorting networks from
    accumulating float-noise breakpoints (total error stays far below
    the 1e-6 comparison tolerances downstream).
    """
    if not 1 <= m <= env.n_lines:
        raise ValueError("m out of range")
    fs = [env.line(i) for i in range(1, m + 1)]
    fs = [_clamp_left(f, t0) for f in fs]
    for j in range(1, m):          # insert line j+1, bubble it up
        for i in range(j - 1, -1, -1):
            D = fs[i + 1] - fs[i]
            S = D.cummax_left(left_tail=False)
            a = fs[i] + S
            b = fs[i + 1] - S
            if prune_tol > 0:
                a = a.prune(prune_tol)
                b = b.prune(prune_tol)
            fs[i], fs[i + 1] = a, b
    return fs
