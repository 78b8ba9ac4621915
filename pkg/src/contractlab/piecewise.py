"""Breakpoint-represented piecewise-linear functions.

The workhorse of CCDF representation and function learning: evaluation,
leftmost inversion, subgradient intervals, upper concave hulls, pointwise
minima, and band-preserving simplification of concave functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .tolerances import ABS_TOL


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Linear interpolation through strictly-increasing breakpoints.

    The domain is [xs[0], xs[-1]]; evaluation outside it is an error.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must have equal length")
        if len(self.xs) < 2:
            raise ValueError("need at least 2 breakpoints")
        dx = np.diff(self.xs)
        if np.any(dx <= 0):
            raise ValueError("xs must be strictly increasing")

    # -- basic views ---------------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return (self.xs[0], self.xs[-1])

    @property
    def slopes(self) -> np.ndarray:
        xs = np.asarray(self.xs)
        ys = np.asarray(self.ys)
        return np.diff(ys) / np.diff(xs)

    def is_nondecreasing(self, tol: float = ABS_TOL) -> bool:
        return bool(np.all(self.slopes >= -tol))

    def is_concave(self, tol: float = ABS_TOL) -> bool:
        s = self.slopes
        return bool(np.all(np.diff(s) <= tol))

    def is_convex(self, tol: float = ABS_TOL) -> bool:
        s = self.slopes
        return bool(np.all(np.diff(s) >= -tol))

    # -- queries -------------------------------------------------------------

    def eval(self, x):
        """Evaluate at a scalar or array of points inside the domain."""
        arr = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(arr < lo - ABS_TOL) or np.any(arr > hi + ABS_TOL):
            raise ValueError(f"point outside domain [{lo}, {hi}]")
        out = np.interp(np.clip(arr, lo, hi), self.xs, self.ys)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def inverse(self, y: float) -> float:
        """Leftmost preimage of y; requires a nondecreasing function."""
        if not self.is_nondecreasing():
            raise ValueError("inverse requires a nondecreasing function")
        ys = np.asarray(self.ys)
        if y < ys[0] - ABS_TOL or y > ys[-1] + ABS_TOL:
            raise ValueError(f"value outside range [{ys[0]}, {ys[-1]}]")
        y = min(max(y, float(ys[0])), float(ys[-1]))
        i = int(np.searchsorted(ys, y, side="left"))
        if i == 0 or ys[i] == y:
            # Breakpoint hit; searchsorted already found the first such index.
            return float(self.xs[i])
        x0, x1 = self.xs[i - 1], self.xs[i]
        y0, y1 = self.ys[i - 1], self.ys[i]
        return float(x0 + (y - y0) * (x1 - x0) / (y1 - y0))

    def subgradient(self, x: float) -> tuple[float, float]:
        """Sorted (left-slope, right-slope) pair at x.

        Inside a segment both entries equal the segment slope; at the domain
        endpoints the single adjacent slope is repeated.
        """
        lo, hi = self.domain
        if x < lo - ABS_TOL or x > hi + ABS_TOL:
            raise ValueError(f"point outside domain [{lo}, {hi}]")
        x = min(max(x, lo), hi)
        s = self.slopes
        xs = np.asarray(self.xs)
        i = int(np.searchsorted(xs, x, side="left"))
        if i < len(xs) and abs(xs[i] - x) <= ABS_TOL:
            left = s[i - 1] if i > 0 else s[0]
            right = s[i] if i < len(s) else s[-1]
            pair = (float(left), float(right))
            return (min(pair), max(pair))
        seg = float(s[i - 1])
        return (seg, seg)

    # -- constructive helpers --------------------------------------------------

    def restricted(self, lo: float, hi: float) -> "PiecewiseLinearFn":
        """Restriction to [lo, hi] with interpolated endpoints."""
        if lo >= hi:
            raise ValueError("empty restriction")
        xs = np.asarray(self.xs)
        keep = (xs > lo + ABS_TOL) & (xs < hi - ABS_TOL)
        new_xs = np.concatenate([[lo], xs[keep], [hi]])
        new_ys = self.eval(new_xs)
        return PiecewiseLinearFn(
            tuple(float(x) for x in new_xs), tuple(float(y) for y in new_ys)
        )

    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))


def pl_eval(fn: PiecewiseLinearFn, x):
    return fn.eval(x)


def pl_inverse(fn: PiecewiseLinearFn, y: float) -> float:
    return fn.inverse(y)


def pl_subgradient(fn: PiecewiseLinearFn, x: float) -> tuple[float, float]:
    return fn.subgradient(x)


def from_breakpoints(points: Iterable[tuple[float, float]]) -> PiecewiseLinearFn:
    """Build a function from (x, y) pairs, dropping duplicate x's.

    Later duplicates within ABS_TOL of an earlier x are dropped, so callers
    can feed slightly redundant point lists.
    """
    xs: list[float] = []
    ys: list[float] = []
    for x, y in points:
        if xs and x <= xs[-1]:
            continue
        xs.append(float(x))
        ys.append(float(y))
    return PiecewiseLinearFn(tuple(xs), tuple(ys))


def concave_closure(points: Sequence[tuple[float, float]]) -> PiecewiseLinearFn:
    """Upper concave hull of a point set with distinct sorted x's.

    Monotone-chain style: keep a stack of hull vertices, popping whenever the
    chord slopes stop decreasing.  The result is concave, passes through a
    subset of the inputs, and dominates all of them.
    """
    if len(points) < 2:
        raise ValueError("need at least 2 points")
    pts = sorted((float(x), float(y)) for x, y in points)
    for (x0, _), (x1, _) in zip(pts, pts[1:]):
        if x1 - x0 <= 0:
            raise ValueError("x values must be distinct")
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            # Pop b if it lies on or below chord a-p (cross product test).
            if (by - ay) * (p[0] - ax) <= (p[1] - ay) * (bx - ax) + 1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    return PiecewiseLinearFn(tuple(x for x, _ in hull), tuple(y for _, y in hull))


def pl_min(f: PiecewiseLinearFn, g: PiecewiseLinearFn) -> PiecewiseLinearFn:
    """Pointwise minimum of two functions on the same domain.

    Crossing points inside shared segments become breakpoints, so the result
    is exact (and concave whenever both inputs are).
    """
    if not np.allclose(f.domain, g.domain, atol=ABS_TOL):
        raise ValueError("domains must match")
    lo, hi = f.domain
    grid = np.unique(np.clip(np.concatenate([f.xs, g.xs]), lo, hi))
    diff = f.eval(grid) - g.eval(grid)
    d0, d1 = diff[:-1], diff[1:]
    crossing = ((d0 > 0) & (d1 < 0)) | ((d0 < 0) & (d1 > 0))
    xs = grid
    if np.any(crossing):
        idx = np.flatnonzero(crossing)
        t = d0[idx] / (d0[idx] - d1[idx])
        xc = grid[idx] + t * (grid[idx + 1] - grid[idx])
        inside = (xc > grid[idx] + ABS_TOL) & (xc < grid[idx + 1] - ABS_TOL)
        xs = np.unique(np.concatenate([grid, xc[inside]]))
    ys = np.minimum(f.eval(xs), g.eval(xs))
    return PiecewiseLinearFn(tuple(float(x) for x in xs), tuple(float(y) for y in ys))


def clip_above(fn: PiecewiseLinearFn, cap: float) -> PiecewiseLinearFn:
    """min(fn, cap); preserves concavity and monotone nondecrease."""
    lo, hi = fn.domain
    const = PiecewiseLinearFn((lo, hi), (cap, cap))
    return pl_min(fn, const)


def simplify_concave(fn: PiecewiseLinearFn, tol: float) -> PiecewiseLinearFn:
    """Sparse over-approximation of a concave nondecreasing function.

    Greedily keeps a subset of breakpoints whose chords sag at most tol below
    fn, then shifts the whole function up by tol.  The result g is concave,
    nondecreasing, and satisfies fn <= g <= fn + tol pointwise, with far fewer
    breakpoints when fn carries noise-scale micro-segments.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    xs = np.asarray(fn.xs)
    ys = np.asarray(fn.ys)
    keep = [0]
    i = 0
    n = len(xs)
    while i < n - 1:
        j = i + 1
        best = j
        while j + 1 < n:
            j += 1
            # Max sag of fn above the chord from i to j over interior points.
            x0, y0, x1, y1 = xs[i], ys[i], xs[j], ys[j]
            mid = slice(i + 1, j)
            chord = y0 + (xs[mid] - x0) * (y1 - y0) / (x1 - x0)
            if np.max(ys[mid] - chord) <= tol:
                best = j
            else:
                break
        keep.append(best)
        i = best
    return PiecewiseLinearFn(
        tuple(float(x) for x in xs[keep]),
        tuple(float(y) + tol for y in ys[keep]),
    )
