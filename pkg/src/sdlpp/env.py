"""Piecewise-linear line environments.

An Environment is an ordered stack of piecewise-linear lines on a
common breakpoint grid, with one tail slope per line so every line is
linear outside the grid.  Line 1 is the top line.  All transforms
return new environments; nothing mutates in place.

Sampled (Brownian) environments use variance-2 increments, counter
indexed so that widening or deepening a window reproduces previously
sampled values bitwise.
"""

from __future__ import annotations

import json
import numpy as np

from . import rng
from .plf import PLF

__all__ = [
    "Environment", "eval_line", "slope", "sample_brownian", "reflect",
    "rotate180", "shift_affine", "with_drifts", "env_sup_diff",
    "save_environment", "load_environment", "BrownianField",
]

SLOPE_TOL = 1e-12  # tail slopes are inputs, compared essentially exactly


class Environment:
    """n piecewise-linear lines on a shared grid, plus tail slopes."""

    __slots__ = ("grid", "values", "slopes")

    def __init__(self, grid, values, slopes):
        grid = np.asarray(grid, dtype=np.float64)
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        slopes = np.atleast_1d(np.asarray(slopes, dtype=np.float64))
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least two breakpoints")
        if not np.all(np.isfinite(grid)) or not np.all(np.diff(grid) > 0):
            raise ValueError("grid breakpoints must be finite and strictly increasing")
        if values.shape[0] < 1 or values.shape[1] != grid.size:
            raise ValueError("values must be (lines, len(grid))")
        if slopes.shape != (values.shape[0],):
            raise ValueError("one tail slope per line required")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))):
            raise ValueError("values and slopes must be finite")
        self.grid = grid
        self.values = values
        self.slopes = slopes
        for a in (self.grid, self.values, self.slopes):
            a.setflags(write=False)

    @property
    def n_lines(self):
        return self.values.shape[0]

    def line(self, i):
        """Line i (1-based, top line is 1) as a PLF."""
        if not 1 <= i <= self.n_lines:
            raise IndexError(f"line {i} out of range 1..{self.n_lines}")
        return PLF(self.grid, self.values[i - 1], self.slopes[i - 1],
                   self.slopes[i - 1], _checked=True)

    def plfs(self):
        return [self.line(i) for i in range(1, self.n_lines + 1)]

    def __repr__(self):
        return (f"Environment({self.n_lines} lines, {self.grid.size} pts on "
                f"[{self.grid[0]:g}, {self.grid[-1]:g}])")


def from_plfs(plfs, slopes=None):
    """Build an Environment from per-line PLFs on the union grid.

    Tail slopes must match on both sides per line (environment lines
    are linear with a single slope outside the grid).
    """
    grid = plfs[0].bp
    for f in plfs[1:]:
        grid = np.union1d(grid, f.bp)
    vals = np.stack([f(grid) for f in plfs])
    if slopes is None:
        slopes = []
        for f in plfs:
            if abs(f.sl - f.sr) > SLOPE_TOL:
                raise ValueError("line has unequal tail slopes; not an environment line")
            slopes.append(f.sr)
    return Environment(grid, vals, np.asarray(slopes, dtype=np.float64))


def eval_line(env, line, x):
    """Evaluate line ``line`` (1-based) at x, linear tails outside the grid."""
    return env.line(line)(x)


def slope(env):
    """The vector of asymptotic (tail) slopes, one per line."""
    return env.slopes.copy()


def sample_brownian(n, drifts, grid, seed):
    """Sample n independent variance-2 Brownian lines on a uniform grid.

    Line i has drift drifts[i]; increments over a grid cell of width d
    are Normal(drift*d, 2d).  Lines anchor to value 0 at coordinate 0
    when 0 is a breakpoint, otherwise to drift*x at the left edge.
    Deterministic in (n, drifts, grid, seed).
    """
    if n <= 0:
        raise ValueError("need at least one line")
    drifts = np.atleast_1d(np.asarray(drifts, dtype=np.float64))
    if drifts.shape != (n,):
        raise ValueError("drifts must have one entry per line")
    grid = np.asarray(grid, dtype=np.float64)
    steps = np.diff(grid)
    if grid.size < 2 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("sample_brownian requires a uniform grid")
    delta = steps[0]
    zero = np.nonzero(np.isclose(grid, 0.0, atol=1e-12))[0]
    anchor = int(zero[0]) if zero.size else 0
    # absolute cell counters so windows of one seed agree where they overlap
    cells = np.rint((grid[:-1] - grid[anchor]) / delta).astype(np.int64) \
        + int(np.rint(grid[anchor] / delta))
    vals = np.empty((n, grid.size))
    for i in range(n):
        z = rng.normals(seed, i + 1, cells)
        inc = np.sqrt(2.0 * delta) * z
        path = np.concatenate([[0.0], np.cumsum(inc)])
        path -= path[anchor]
        vals[i] = path + drifts[i] * (grid - grid[anchor]) + drifts[i] * grid[anchor]
    return Environment(grid, vals, drifts)


def reflect(env):
    """R f(x) = f(-x): reverse the grid, negate coordinates and slopes."""
    return Environment(-env.grid[::-1], env.values[:, ::-1], -env.slopes)


def rotate180(env):
    """180-degree rotation: line i becomes -f_{n+1-i}(-x)."""
    return Environment(-env.grid[::-1], -env.values[::-1, ::-1], env.slopes[::-1])


def shift_affine(env, a, c):
    """Add a*x + c to every line (tail slopes shift by a)."""
    return Environment(env.grid, env.values + a * env.grid + c, env.slopes + a)


def with_drifts(env, drifts):
    """Add drift_i * x to line i."""
    drifts = np.atleast_1d(np.asarray(drifts, dtype=np.float64))
    if drifts.shape != (env.n_lines,):
        raise ValueError("drifts must have one entry per line")
    return Environment(env.grid, env.values + drifts[:, None] * env.grid[None, :],
                       env.slopes + drifts)


def env_sup_diff(a, b):
    """Sup distance between two environments (breakpoint union + tail probes)."""
    if a.n_lines != b.n_lines:
        raise ValueError("environments have different line counts")
    return max(a.line(i).sup_diff(b.line(i)) for i in range(1, a.n_lines + 1))


# ----------------------------------------------------------------------
# file format: {version: 1, breakpoints: [...], lines: [{values, slope}],
#               meta: {...}}; round-trip is value-exact (json float repr).

def save_environment(env, path, meta=None):
    doc = {
        "version": 1,
        "breakpoints": env.grid.tolist(),
        "lines": [{"values": env.values[i].tolist(), "slope": float(env.slopes[i])}
                  for i in range(env.n_lines)],
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_environment(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported environment file version {doc.get('version')!r}")
    grid = np.asarray(doc["breakpoints"], dtype=np.float64)
    vals = np.stack([np.asarray(l["values"], dtype=np.float64) for l in doc["lines"]])
    slopes = np.asarray([l["slope"] for l in doc["lines"]], dtype=np.float64)
    env = Environment(grid, vals, slopes)
    return env, doc.get("meta", {})


# ----------------------------------------------------------------------

class BrownianField:
    """Lazily windowed drift-free variance-2 Brownian environment.

    A single (seed, step) pair defines one infinite environment; any
    window of any depth reproduces the same values.  Windows are
    snapped to step * Z and must contain 0 (the anchoring point).
    """

    def __init__(self, seed, step):
        if step <= 0:
            raise ValueError("step must be positive")
        self.seed = int(seed)
        self.step = float(step)

    def window(self, n_lines, lo, hi):
        if n_lines < 1:
            raise ValueError("need at least one line")
        ilo = int(np.floor(lo / self.step - 1e-9))
        ihi = int(np.ceil(hi / self.step + 1e-9))
        ilo = min(ilo, 0)
        ihi = max(ihi, 1)
        grid = np.arange(ilo, ihi + 1, dtype=np.float64) * self.step
        cells = np.arange(ilo, ihi, dtype=np.int64)
        scale = np.sqrt(2.0 * self.step)
        vals = np.empty((n_lines, grid.size))
        for i in range(n_lines):
            inc = scale * rng.normals(self.seed, i + 1, cells)
            path = np.concatenate([[0.0], np.cumsum(inc)])
            vals[i] = path - path[-ilo]  # anchor value 0 at x = 0
        return Environment(grid, vals, np.zeros(n_lines))
