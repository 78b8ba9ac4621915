"""Hardness-instance generators and approximation-guarantee verifiers.

The multiplicative family makes bounded contracts lose an unbounded factor;
the additive family makes them lose almost 1/4 additively.  Both satisfy
FOSD and CDFP, which the generators assert.  The verifiers compare OPT,
OPT_H, and LIN and check the mixed-approximation inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .agent import best_response_finite
from .instances import (
    Action,
    CcdfInstance,
    Contract,
    FiniteInstance,
    OutcomeSpace,
    check_cdfp,
    check_fosd,
    validate_ccdf,
    validate_finite,
)
from .optimize import (
    optimal_bounded_contract,
    optimal_general_contract,
    optimal_linear_contract,
)
from .piecewise import PiecewiseLinearFn, from_breakpoints, pl_min
from .tolerances import ABS_TOL


@dataclass(frozen=True)
class HardnessParams:
    eps: float
    h: float = 1.0
    discretization_n: int = 200

    def __post_init__(self) -> None:
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if self.h < 1:
            raise ValueError("H must be >= 1")
        if self.discretization_n < 1:
            raise ValueError("need at least one grid point")


@dataclass(frozen=True)
class MultiplicativeHardness:
    finite: FiniteInstance
    ccdf: CcdfInstance
    optimal_contract: Contract        # (0, 0, 2H/eps); ties every action at 0
    optimal_utility: float            # eps (1 + ln(1/eps))


def gen_multiplicative_hardness(params: HardnessParams) -> MultiplicativeHardness:
    """Continuum family c_a = eps(e^a - 1 - a), F(1|c_a) = eps e^a,
    F(2|c_a) = (eps/2H) c_a, discretized uniformly in a over (0, ln(1/eps)].

    The grid starts one step above a = 0: the a = 0 action costs nothing but
    is not the null point mass, and two distinct zero-cost distributions
    would violate FOSD once the null action is added.
    """
    eps, h, n = params.eps, params.h, params.discretization_n
    top = math.log(1.0 / eps)
    grid = [(j + 1) * top / n for j in range(n)]
    actions = [Action(0.0, (1.0,) + (0.0,) * 2)]
    for a in grid:
        cost = eps * (math.exp(a) - 1.0 - a)
        f1 = eps * math.exp(a)
        f2 = (eps / (2.0 * h)) * cost
        pmf = (1.0 - f1, f1 - f2, f2)
        if any(p < -ABS_TOL or p > 1 + ABS_TOL for p in pmf):
            raise ValueError(f"probability overflow at a={a}: eps too large")
        actions.append(Action(cost, pmf))
    outcomes = OutcomeSpace((0.0, 1.0, 1.0))
    finite = FiniteInstance(outcomes, tuple(actions))
    assert validate_finite(finite).ok
    assert check_fosd(finite)[0] and check_cdfp(finite)[0]

    cost_max = eps * (1.0 / eps - 1.0 - top)
    pts1 = [(0.0, 0.0)] + [(eps * (math.exp(a) - 1 - a), eps * math.exp(a)) for a in grid]
    if cost_max < 1.0:
        pts1.append((1.0, pts1[-1][1]))
    f2_top = (eps / (2.0 * h)) * cost_max
    pts2 = [(0.0, 0.0), (cost_max, f2_top)]
    if cost_max < 1.0:
        pts2.append((1.0, f2_top))
    ccdf = CcdfInstance(outcomes, (from_breakpoints(pts1), from_breakpoints(pts2)), cost_max)
    assert validate_ccdf(ccdf).ok

    contract = Contract((0.0, 0.0, 2.0 * h / eps))
    return MultiplicativeHardness(finite, ccdf, contract, eps * (1.0 + top))


def gen_additive_hardness(params: HardnessParams) -> FiniteInstance:
    """Three-action family: F(1|eps) = 1/2, F(2|eps) = 4 eps^2 / H and
    F(1|1/4) = 1, F(2|1/4) = eps / H, with values (0, 1, 1).

    Needs eps < 1/8 for the CCDF points to stay concave in cost.
    """
    eps, h = params.eps, params.h
    if eps >= 0.125:
        raise ValueError("additive hardness requires eps < 1/8")
    outcomes = OutcomeSpace((0.0, 1.0, 1.0))
    instance = FiniteInstance(
        outcomes,
        (
            Action(0.0, (1.0, 0.0, 0.0)),
            Action(eps, (0.5, 0.5 - 4 * eps * eps / h, 4 * eps * eps / h)),
            Action(0.25, (0.0, 1.0 - eps / h, eps / h)),
        ),
    )
    assert validate_finite(instance).ok
    assert check_fosd(instance)[0] and check_cdfp(instance)[0]
    return instance


@dataclass(frozen=True)
class GapReport:
    opt: float
    opt_h: float
    ratio: float
    gap: float
    opt_source: str


def verify_gap(
    instance: FiniteInstance, h: float, certified_contract: Optional[Contract] = None
) -> GapReport:
    """OPT vs OPT_H, as a multiplicative ratio and an additive gap.

    A generator-supplied certified contract lower-bounds OPT exactly, which
    guards the 1/eta-bounded LP against ill-conditioning on instances whose
    smallest probabilities are eps^2-scale.
    """
    opt = optimal_general_contract(instance).principal_utility
    source = "lp"
    if certified_contract is not None:
        certified = best_response_finite(instance, certified_contract).principal_utility
        if certified > opt:
            opt, source = certified, "certified-contract"
    opt_h = optimal_bounded_contract(instance, h).principal_utility
    ratio = opt / opt_h if opt_h > ABS_TOL else math.inf
    return GapReport(opt, opt_h, ratio, opt - opt_h, source)


@dataclass(frozen=True)
class MixedApproxRow:
    eps: float
    source: str            # "grid" | "opt/4" | "L/4"
    opt: float
    lin: float
    bound: float
    holds: bool


def verify_mixed_approx(
    instance: FiniteInstance, eps_grid: Sequence[float]
) -> tuple[MixedApproxRow, ...]:
    """Check OPT <= 2 (log2(1/eps) LIN + eps) on a grid plus the two
    corollary substitutions eps = OPT/4 and eps = L/4 (L = smallest expected
    action value), skipping substitutions outside (0, 1/2)."""
    opt = optimal_general_contract(instance).principal_utility
    _, lin = optimal_linear_contract(instance)
    values = instance.expected_values()
    l_min = float(values.min())

    candidates = [(float(e), "grid") for e in eps_grid]
    candidates.append((opt / 4.0, "opt/4"))
    candidates.append((l_min / 4.0, "L/4"))
    rows = []
    for eps, source in candidates:
        if not (0 < eps < 0.5):
            continue
        bound = 2.0 * (math.log2(1.0 / eps) * lin + eps)
        rows.append(MixedApproxRow(eps, source, opt, lin, bound, opt <= bound + 1e-9))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Random test fixtures
# ---------------------------------------------------------------------------


def _random_values(rng: np.random.Generator, m: int) -> tuple[float, ...]:
    vals = np.sort(rng.uniform(0.0, 1.0, size=m))
    vals[0] = rng.uniform(0.0, 0.2)
    vals[-1] = rng.uniform(0.8, 1.0)
    return tuple(float(x) for x in np.sort(vals))


def gen_random_fosd_cdfp(m: int, k_breakpoints: int, seed: int) -> CcdfInstance:
    """Random valid CCDF instance: concave nondecreasing curves from sorted
    slope decrements, nested by cumulative pointwise minimum after a random
    downscale.  Always passes the validators (asserted)."""
    if m < 2:
        raise ValueError("need m >= 2")
    rng = np.random.default_rng(seed)
    cost_max = float(rng.uniform(0.5, 1.0))
    fns = []
    for _ in range(1, m):
        k = max(1, k_breakpoints)
        interior = np.sort(rng.uniform(0.05 * cost_max, 0.95 * cost_max, size=k - 1))
        xs = np.concatenate([[0.0], interior, [cost_max]])
        slopes = np.sort(rng.uniform(0.2, 3.0, size=len(xs) - 1))[::-1]
        ys = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        top = rng.uniform(0.4, 0.95)
        ys = ys * (top / ys[-1])
        pts = list(zip(xs.tolist(), ys.tolist()))
        if cost_max < 1.0:
            pts.append((1.0, float(ys[-1])))
        fns.append(from_breakpoints(pts))
    for i in range(1, len(fns)):
        scale = rng.uniform(0.5, 0.95)
        scaled = PiecewiseLinearFn(fns[i].xs, tuple(y * scale for y in fns[i].ys))
        fns[i] = pl_min(fns[i - 1], scaled)
    instance = CcdfInstance(OutcomeSpace(_random_values(rng, m)), tuple(fns), cost_max)
    report = validate_ccdf(instance)
    assert report.ok, str(report)
    return instance


def gen_random_finite(m: int, n: int, seed: int) -> FiniteInstance:
    """Random valid finite instance (null action included, no FOSD imposed)."""
    if m < 2 or n < 1:
        raise ValueError("need m >= 2 and n >= 1")
    rng = np.random.default_rng(seed)
    actions = [Action(0.0, (1.0,) + (0.0,) * (m - 1))]
    for _ in range(n - 1):
        cost = float(rng.uniform(0.0, 0.9))
        pmf = rng.dirichlet(np.ones(m))
        actions.append(Action(cost, tuple(float(p) for p in pmf)))
    instance = FiniteInstance(OutcomeSpace(_random_values(rng, m)), tuple(actions))
    assert validate_finite(instance).ok
    return instance


def discretize_ccdf(instance: CcdfInstance, costs: Sequence[float]) -> FiniteInstance:
    """Finite instance sampling a CCDF instance at given positive costs.

    Sampling a concave nondecreasing curve preserves FOSD and CDFP, so the
    result validates whenever the source does.
    """
    tails = instance.ccdf_at(np.asarray(sorted(set(float(c) for c in costs))))
    actions = [Action(0.0, (1.0,) + (0.0,) * (instance.m - 1))]
    for cost, tail in zip(sorted(set(float(c) for c in costs)), tails):
        full = np.concatenate([[1.0], tail, [0.0]])
        pmf = np.maximum(full[:-1] - full[1:], 0.0)
        actions.append(Action(cost, tuple(float(p) for p in pmf / pmf.sum())))
    return FiniteInstance(instance.outcomes, tuple(actions))
