"""Learning monotone convex and concave functions from subgradient queries.

The convex learner probes an exponential grid of slopes and rebuilds the
function from the reported positions; the concave learner runs the convex
learner on the inverse and flips the axes back.  With an exact oracle the
results sandwich the truth to within the target accuracy; with the boosted
threshold-query oracle the same holds with its confidence degradation.
"""

from __future__ import annotations

import math
from typing import Callable

from .piecewise import PiecewiseLinearFn, clip_above, from_breakpoints

SubgradientOracle = Callable[[float], float]


def slope_grid_size(eps: float) -> int:
    """Number of slope indices per side: i_max = ceil((4/eps) ln(4/eps))."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil((4.0 / eps) * math.log(4.0 / eps)))


def learn_convex(oracle: SubgradientOracle, eps: float) -> PiecewiseLinearFn:
    """Approximate a nondecreasing convex G: [0, s] -> [0, 1] from below.

    Queries the slope e^(i eps / 4) for every integer i in [-i_max, i_max]
    and rebuilds the function recursively from zero at the leftmost reported
    position, then extends past the last position at the steepest grid slope
    until the value reaches 1 (so the inverse is defined on all of [0, 1]).

    Guarantee with an eps^2/16-oracle: the result never exceeds G, and at
    every x either the gap is at most eps or the result already has a
    subgradient of at least 1/eps at x + eps^2/16.
    """
    i_max = slope_grid_size(eps)
    slopes = [math.exp(i * eps / 4.0) for i in range(-i_max, i_max + 1)]
    raw = [float(oracle(s)) for s in slopes]
    # Noise can break the ordering the construction assumes; the running max
    # preserves each position's one-sided containment while restoring it.
    xs: list[float] = []
    hi = 0.0
    for x in raw:
        hi = max(hi, x)
        xs.append(hi)

    pts: list[tuple[float, float]] = [(0.0, 0.0)]
    if xs[0] > 0.0:
        pts.append((xs[0], 0.0))
    val = 0.0
    for i in range(len(xs) - 1):
        if xs[i + 1] <= xs[i]:
            continue
        val += slopes[i] * (xs[i + 1] - xs[i])
        pts.append((xs[i + 1], val))
    if val < 1.0:
        top = slopes[-1]
        pts.append((pts[-1][0] + (1.0 - val) / top, 1.0))
    return from_breakpoints(pts)


def learn_concave(oracle: SubgradientOracle, eps: float) -> PiecewiseLinearFn:
    """Approximate a nondecreasing concave F: [0, 1] -> [0, 1] from above.

    Learns the convex inverse with target eps^2/2 (which asks the oracle for
    eps^4/64 accuracy) and inverts the result.  Values may exceed 1 by the
    oracle's confidence padding, so the output is clipped back to 1; the
    guarantee is F <= result everywhere and result <= F + eps on [eps, 1].
    """
    g = learn_convex(oracle, 0.5 * eps * eps)
    # Upper inverse: swap axes; where g is flat at cost zero keep the largest
    # position, so the inverse stays above the truth at cost 0.
    inv_pts: list[tuple[float, float]] = []
    for x, y in g.breakpoints():
        if inv_pts and y <= inv_pts[-1][0]:
            inv_pts[-1] = (inv_pts[-1][0], max(inv_pts[-1][1], x))
            continue
        inv_pts.append((y, x))
    fn = from_breakpoints(inv_pts)
    lo, hi = fn.domain
    if hi < 1.0:
        # Defensive: the convex learner's extension should already reach 1.
        fn = from_breakpoints(list(fn.breakpoints()) + [(1.0, fn.ys[-1])])
    fn = fn.restricted(0.0, 1.0)
    return clip_above(fn, 1.0)
