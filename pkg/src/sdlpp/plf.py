"""Exact piecewise-linear function arithmetic.

A PLF is a continuous piecewise-linear function on R given by values at
a strictly increasing breakpoint list plus one linear tail on each
side.  All operators here are exact (up to float rounding): running
maxima insert the true crossing points as new breakpoints instead of
sampling, which is what keeps the algebraic identities of the package
at 1e-9 rather than at grid resolution.

An optional prune tolerance merges breakpoints whose removal perturbs
the function by less than the tolerance; deep sorting networks use a
tiny budget (<<1e-9 total) to stop float-noise kinks from accumulating.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PLF"]


class PLF:
    """Continuous piecewise-linear function with linear tails."""

    __slots__ = ("bp", "vals", "sl", "sr")

    def __init__(self, bp, vals, sl, sr, _checked=False):
        bp = np.asarray(bp, dtype=np.float64)
        vals = np.asarray(vals, dtype=np.float64)
        if not _checked:
            if bp.ndim != 1 or bp.shape != vals.shape or bp.size < 1:
                raise ValueError("breakpoints/values must be equal-length 1-D arrays")
            if bp.size > 1 and not np.all(np.diff(bp) > 0):
                raise ValueError("breakpoints must be strictly increasing")
            if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))
                    and np.isfinite(sl) and np.isfinite(sr)):
                raise ValueError("PLF data must be finite")
        self.bp = bp
        self.vals = vals
        self.sl = float(sl)
        self.sr = float(sr)

    # ------------------------------------------------------------------
    # evaluation / resampling

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x)
        out = np.interp(xs, self.bp, self.vals)
        left = xs < self.bp[0]
        right = xs > self.bp[-1]
        if left.any():
            out[left] = self.vals[0] + self.sl * (xs[left] - self.bp[0])
        if right.any():
            out[right] = self.vals[-1] + self.sr * (xs[right] - self.bp[-1])
        return float(out[0]) if scalar else out

    def on_grid(self, bp):
        """Resample onto a breakpoint superset (exact if bp covers self.bp)."""
        bp = np.asarray(bp, dtype=np.float64)
        return PLF(bp, self(bp), self.sl, self.sr, _checked=True)

    # ------------------------------------------------------------------
    # linear algebra

    def _merged(self, other):
        bp = np.union1d(self.bp, other.bp)
        return bp, self(bp), other(bp)

    def __add__(self, other):
        if isinstance(other, PLF):
            bp, a, b = self._merged(other)
            return PLF(bp, a + b, self.sl + other.sl, self.sr + other.sr, _checked=True)
        return PLF(self.bp, self.vals + float(other), self.sl, self.sr, _checked=True)

    def __sub__(self, other):
        if isinstance(other, PLF):
            bp, a, b = self._merged(other)
            return PLF(bp, a - b, self.sl - other.sl, self.sr - other.sr, _checked=True)
        return PLF(self.bp, self.vals - float(other), self.sl, self.sr, _checked=True)

    def __neg__(self):
        return PLF(self.bp, -self.vals, -self.sl, -self.sr, _checked=True)

    def add_affine(self, a, c):
        """Return self + a*x + c."""
        return PLF(self.bp, self.vals + a * self.bp + c,
                   self.sl + a, self.sr + a, _checked=True)

    def reflect(self):
        """Return x -> f(-x)."""
        return PLF(-self.bp[::-1], self.vals[::-1], -self.sr, -self.sl, _checked=True)

    # ------------------------------------------------------------------
    # running maxima

    def cummax_left(self, left_tail=True):
        """Return S(x) = sup_{z <= x} f(z), with exact kink insertion.

        With left_tail=False the supremum starts at the first breakpoint
        (domain restricted to [bp[0], inf)), which is what the melon /
        corner-sorting operators need.
        """
        if left_tail and self.sl < 0:
            raise ValueError("sup over (-inf, x] diverges: left tail slope < 0")
        bp, vals = self.bp, self.vals
        run = np.maximum.accumulate(vals)
        # crossing cells: running max flat at run[j], f rises through it
        j = np.nonzero((run[:-1] > vals[:-1]) & (vals[1:] > run[:-1]))[0]
        if j.size:
            frac = (run[j] - vals[j]) / (vals[j + 1] - vals[j])
            xins = bp[j] + frac * (bp[j + 1] - bp[j])
            nbp = np.insert(bp, j + 1, xins)
            svals = np.insert(run, j + 1, run[j])
        else:
            nbp = bp
            svals = run
        # S follows f on the far left when the tail rises, else is flat
        new_sl = max(self.sl, 0.0) if left_tail else 0.0
        # right tail: f has slope sr; S flat at the current max until f
        # resurfaces (if ever)
        if self.sr > 0:
            if svals[-1] > vals[-1]:
                xcross = bp[-1] + (svals[-1] - vals[-1]) / self.sr
                nbp = np.append(nbp, xcross)
                svals = np.append(svals, svals[-1])
            new_sr = self.sr
        else:
            new_sr = 0.0
        return PLF(nbp, svals, new_sl, new_sr, _checked=True)

    def cummax_right(self, right_tail=True):
        """Return S(x) = sup_{z >= x} f(z)."""
        return self.reflect().cummax_left(left_tail=right_tail).reflect()

    # ------------------------------------------------------------------
    # simplification

    def prune(self, tol):
        """Drop interior breakpoints that move the function by <= tol."""
        if self.bp.size <= 2:
            return self
        bp, vals = self.bp, self.vals
        while True:
            if bp.size <= 2:
                break
            x0, x1, x2 = bp[:-2], bp[1:-1], bp[2:]
            chord = vals[:-2] + (vals[2:] - vals[:-2]) * (x1 - x0) / (x2 - x0)
            dev = np.abs(vals[1:-1] - chord)
            drop = dev <= tol
            if not drop.any():
                break
            # never drop two adjacent points in one pass
            keep = np.ones(bp.size, dtype=bool)
            last = -2
            for i in np.nonzero(drop)[0]:
                if i - 1 != last:
                    keep[i + 1] = False
                    last = i
            bp = bp[keep]
            vals = vals[keep]
            if keep.all():
                break
        return PLF(bp, vals, self.sl, self.sr, _checked=True)

    def sup_diff(self, other, extra=()):
        """Sup-norm distance over both breakpoint sets (tails via probes)."""
        pts = np.union1d(self.bp, other.bp)
        if len(extra):
            pts = np.union1d(pts, np.asarray(extra, dtype=np.float64))
        span = max(pts[-1] - pts[0], 1.0)
        probes = np.array([pts[0] - span, pts[-1] + span])
        pts = np.concatenate([probes[:1], pts, probes[1:]])
        return float(np.max(np.abs(self(pts) - other(pts))))

    def __repr__(self):
        return (f"PLF({self.bp.size} pts on [{self.bp[0]:g}, {self.bp[-1]:g}], "
                f"slopes {self.sl:g}/{self.sr:g})")
