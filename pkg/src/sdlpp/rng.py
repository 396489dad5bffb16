"""Counter-based random streams.

Every random quantity in the package is a pure function of
(master seed, stream id, counter).  Streams can be split arbitrarily
(per replica, per line, per purpose) without any shared state, so
results never depend on evaluation order and lazily widened windows of
a sampled environment reproduce bitwise.

The mixer is splitmix64; uniforms are mapped to normals through the
inverse normal CDF so each counter consumes exactly one 64-bit word.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["mix64", "split_seed", "uniforms", "normals"]

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xBF58476D1CE4E5B9)
_M3 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def mix64(x):
    """splitmix64 finalizer on a uint64 scalar or array."""
    with np.errstate(over="ignore"):
        z = (np.asarray(x, dtype=np.uint64) + _M1)
        z = (z ^ (z >> np.uint64(30))) * _M2
        z = (z ^ (z >> np.uint64(27))) * _M3
        return z ^ (z >> np.uint64(31))


def split_seed(seed, *parts):
    """Derive a child seed from a master seed and integer labels.

    Children of distinct label tuples are effectively independent
    streams; the operation is associative enough for our use
    (split_seed(s, a, b) != split_seed(split_seed(s, a), b) is fine,
    pick one convention and keep it).
    """
    h = mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    for p in parts:
        h = mix64(h ^ mix64(np.uint64(int(p) & 0xFFFFFFFFFFFFFFFF)))
    return int(h)


def uniforms(seed, stream, counters):
    """Uniform(0,1) variates at the given integer counters.

    ``counters`` may be any integer array; negative indices are mapped
    through a zig-zag so a stream is indexed by all of Z.
    """
    c = np.asarray(counters)
    c = np.where(c >= 0, 2 * c.astype(np.int64), -2 * c.astype(np.int64) - 1)
    h = np.uint64(split_seed(seed, stream))
    with np.errstate(over="ignore"):
        z = mix64(h ^ mix64(c.astype(np.uint64)))
    u = (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    # keep strictly inside (0,1) for ndtri
    return np.clip(u, 2.0 ** -53, 1.0 - 2.0 ** -53)


def normals(seed, stream, counters):
    """Standard normal variates at the given integer counters."""
    return ndtri(uniforms(seed, stream, counters))
