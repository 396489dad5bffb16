"""Hot DP kernels: numba-jitted with a pure-numpy fallback.

The multi-path last passage sweep walks the breakpoint columns left to
right holding a dense table over the active paths' line positions
(axis j = line of path j, offset so index 0 is the path's lowest
reachable line).  Per column: add the per-line increments, then let
paths drop (suffix max along each axis in path order, respecting the
strict line ordering).  Entries violating the strict ordering stay at
-inf throughout.

Backend selection: numba when importable, unless SDLPP_NO_NUMBA=1 (or
numba is missing), in which case the numpy path runs.  ``python -m
sdlpp.bench`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

NEG_INF = -np.inf

_WANT_NUMBA = os.environ.get("SDLPP_NO_NUMBA", "0") != "1"
HAS_NUMBA = False
if _WANT_NUMBA:
    try:
        from numba import njit
        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False

if not HAS_NUMBA:
    def njit(*args, **kwargs):  # no-op decorator
        def wrap(f):
            return f
        if args and callable(args[0]):
            return args[0]
        return wrap


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"


# ----------------------------------------------------------------------
# numba segment kernels (k = 2, 3); the same loops run uncompiled if
# numba is unavailable, but the numpy fallback below is used instead.

@njit(cache=True)
def _seg_k2_nb(V, DF0, DF1, L0, L1, t0, t1, b0, b1, out):
    r0, r1 = V.shape
    for t in range(t0, t1):
        for i in range(r0):
            a = DF0[i, t]
            for j in range(r1):
                if V[i, j] > NEG_INF:
                    V[i, j] += a + DF1[j, t]
        for j in range(r1):          # path 0 drops
            best = NEG_INF
            for i in range(r0 - 1, -1, -1):
                if V[i, j] > best:
                    best = V[i, j]
                elif L0[i] < L1[j] and best > V[i, j]:
                    V[i, j] = best
        for i in range(r0):          # path 1 drops
            best = NEG_INF
            for j in range(r1 - 1, -1, -1):
                if V[i, j] > best:
                    best = V[i, j]
                elif L0[i] < L1[j] and best > V[i, j]:
                    V[i, j] = best
        if b0 >= 0:
            out[t] = V[b0, b1]


@njit(cache=True)
def _seg_k3_nb(V, DF0, DF1, DF2, L0, L1, L2, t0, t1, b0, b1, b2, out):
    r0, r1, r2 = V.shape
    for t in range(t0, t1):
        for i in range(r0):
            a = DF0[i, t]
            for j in range(r1):
                ab = a + DF1[j, t]
                for k in range(r2):
                    if V[i, j, k] > NEG_INF:
                        V[i, j, k] += ab + DF2[k, t]
        for j in range(r1):
            for k in range(r2):
                best = NEG_INF
                for i in range(r0 - 1, -1, -1):
                    if V[i, j, k] > best:
                        best = V[i, j, k]
                    elif L0[i] < L1[j] and best > V[i, j, k]:
                        V[i, j, k] = best
        for i in range(r0):
            for k in range(r2):
                best = NEG_INF
                for j in range(r1 - 1, -1, -1):
                    if V[i, j, k] > best:
                        best = V[i, j, k]
                    elif L0[i] < L1[j] and L1[j] < L2[k] and best > V[i, j, k]:
                        V[i, j, k] = best
        for i in range(r0):
            for j in range(r1):
                best = NEG_INF
                for k in range(r2 - 1, -1, -1):
                    if V[i, j, k] > best:
                        best = V[i, j, k]
                    elif L1[j] < L2[k] and best > V[i, j, k]:
                        V[i, j, k] = best
        if b0 >= 0:
            out[t] = V[b0, b1, b2]


# ----------------------------------------------------------------------
# numpy fallback (any k >= 1)

def _strict_mask(line_axes):
    k = len(line_axes)
    shape = [ax.size for ax in line_axes]
    mask = np.ones(shape, dtype=bool)
    for j in range(k - 1):
        a = line_axes[j].reshape([-1 if d == j else 1 for d in range(k)])
        b = line_axes[j + 1].reshape([-1 if d == j + 1 else 1 for d in range(k)])
        mask &= a < b
    return mask


def _relax_np(V, mask):
    k = V.ndim
    for j in range(k):
        V = np.flip(np.maximum.accumulate(np.flip(V, axis=j), axis=j), axis=j)
        if k > 1:
            V = np.where(mask, V, NEG_INF)
    return V


def _seg_np(V, DFs, line_axes, t0, t1, bidx, out):
    k = V.ndim
    mask = _strict_mask(line_axes) if k > 1 else None
    for t in range(t0, t1):
        add = 0.0
        for j in range(k):
            add = add + DFs[j][:, t].reshape([-1 if d == j else 1 for d in range(k)])
        V = V + add
        if k > 1:
            V = np.where(mask, V, NEG_INF)
        V = _relax_np(V, mask)
        if bidx is not None:
            out[t] = V[bidx]
    return V


# ----------------------------------------------------------------------
# dispatch

def run_segment(V, DFs, line_axes, t0, t1, bidx, out):
    """Advance the DP table over columns [t0, t1); returns the table.

    ``bidx`` (tuple or None): state recorded into ``out`` per column
    after relaxation, used to read off values ending at a common point.
    """
    k = V.ndim
    if k == 0:
        return V
    if HAS_NUMBA and k == 2:
        b0, b1 = bidx if bidx is not None else (-1, -1)
        _seg_k2_nb(V, DFs[0], DFs[1], line_axes[0], line_axes[1],
                   t0, t1, b0, b1, out if out is not None else np.empty(1))
        return V
    if HAS_NUMBA and k == 3:
        b0, b1, b2 = bidx if bidx is not None else (-1, -1, -1)
        _seg_k3_nb(V, DFs[0], DFs[1], DFs[2], line_axes[0], line_axes[1],
                   line_axes[2], t0, t1, b0, b1, b2,
                   out if out is not None else np.empty(1))
        return V
    return _seg_np(V, DFs, line_axes, t0, t1, bidx, out)


def relax(V, line_axes):
    """One free-drop relaxation of the DP table (no increments)."""
    if V.ndim == 0:
        return V
    mask = _strict_mask(line_axes) if V.ndim > 1 else None
    return _relax_np(V, mask)
