"""Optimal contract computation.

Per-action payment-minimization LPs for the table form, the breakpoint LP in
increment variables for the CCDF form, linear-contract optimization, the
robustification transform, and the mixed-action approximation checker.

The per-candidate LPs use lazy constraint generation: solve against a small
active set of incentive constraints, add the most violated one, repeat.
Infeasibility against a subset already certifies infeasibility of the full
problem, so the loop is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .instances import (
    CcdfInstance,
    Contract,
    Distribution,
    FiniteInstance,
    OutcomeSpace,
    ccdf_from_pmf,
    validate_finite,
)
from .lp import LpResult, lp_problem, solve_lp
from .tolerances import ABS_TOL, LP_TOL, TIE_TOL

_ALL_ROWS_LIMIT = 40     # below this many candidates, skip constraint generation


@dataclass(frozen=True)
class ActionDiagnostic:
    label: Union[int, float]
    status: str                      # "optimal" | "infeasible"
    expected_payment: Optional[float]
    principal_utility: Optional[float]


@dataclass(frozen=True)
class OptimalContractResult:
    contract: Contract
    incentivized_action: Union[int, float]
    principal_utility: float
    per_action: tuple[ActionDiagnostic, ...]
    extra_index: Optional[int] = None


def _min_payment_for_candidate(
    obj_vec: np.ndarray,
    cand_rows: np.ndarray,
    cand_costs: np.ndarray,
    i: int,
    lower: np.ndarray,
    upper: np.ndarray,
    fixed_a: Optional[np.ndarray] = None,
    fixed_senses: tuple[str, ...] = (),
    fixed_b: tuple[float, ...] = (),
) -> Optional[LpResult]:
    """Minimize obj_vec @ x subject to IC of candidate i against all others.

    IC rows are (row_i - row_j) @ x >= c_i - c_j.  Rows in fixed_* are always
    included (used for the increment form's prefix bounds).
    """
    n_cand = len(cand_costs)
    others = [j for j in range(n_cand) if j != i]
    diff = cand_rows[i] - cand_rows[others]
    rhs = cand_costs[i] - cand_costs[others]

    if n_cand <= _ALL_ROWS_LIMIT:
        active = list(range(len(others)))
    else:
        # Seed with the cost-nearest neighbours plus the extremes.
        order = np.argsort(np.abs(cand_costs[others] - cand_costs[i]), kind="stable")
        active = sorted(set(order[:8].tolist() + [0, len(others) - 1]))

    n_fixed = 0 if fixed_a is None else len(fixed_b)
    active_set = set(active)
    while True:
        rows = diff[active]
        senses = tuple(">=" for _ in active)
        b = tuple(float(r) for r in rhs[active])
        if n_fixed:
            rows = np.vstack([rows, fixed_a]) if len(active) else np.asarray(fixed_a)
            senses = senses + fixed_senses
            b = b + fixed_b
        res = solve_lp(lp_problem(obj_vec, rows, senses, b, lower, upper))
        if res.status == "infeasible":
            return None
        if res.status != "optimal":
            raise RuntimeError(f"unexpected LP status {res.status!r}")
        x = np.asarray(res.x)
        viol = diff @ x - rhs
        order = np.argsort(viol, kind="stable")
        new = [int(j) for j in order if viol[j] < -10 * LP_TOL and j not in active_set][:8]
        if not new:
            return res
        active.extend(new)
        active.sort()
        active_set.update(new)


def optimal_bounded_contract(instance: FiniteInstance, h: float) -> OptimalContractResult:
    """Optimal H-bounded contract by one payment-minimization LP per action.

    Actions that cannot be incentivized within the payment bound are recorded
    as infeasible and skipped, not fatal.
    """
    if h < 1:
        raise ValueError("H must be >= 1")
    report = validate_finite(instance)
    if not report.ok:
        raise ValueError(f"invalid instance: {report}")
    v = instance.outcomes.as_array()
    pmf = instance.pmf_matrix()
    costs = instance.costs()
    values = pmf @ v
    m = instance.m

    lower = np.zeros(m)
    upper = np.full(m, float(h))
    best: Optional[tuple[float, int, np.ndarray]] = None
    diags: list[ActionDiagnostic] = []
    for i in range(instance.n):
        res = _min_payment_for_candidate(pmf[i], pmf, costs, i, lower, upper)
        if res is None:
            diags.append(ActionDiagnostic(i, "infeasible", None, None))
            continue
        payment = res.value
        utility = float(values[i] - payment)
        diags.append(ActionDiagnostic(i, "optimal", float(payment), utility))
        if best is None or utility > best[0] + 1e-12:
            best = (utility, i, np.asarray(res.x))
    assert best is not None, "the null action is always implementable"
    utility, idx, p = best
    p = np.clip(p, 0.0, h)
    return OptimalContractResult(
        contract=Contract(tuple(float(x) for x in p)),
        incentivized_action=idx,
        principal_utility=utility,
        per_action=tuple(diags),
    )


def smallest_positive_probability(instance: FiniteInstance) -> float:
    pmf = instance.pmf_matrix()
    positive = pmf[pmf > ABS_TOL]
    return float(positive.min())


def optimal_general_contract(instance: FiniteInstance) -> OptimalContractResult:
    """Unbounded-optimal contract via the H = 1/eta cap.

    With eta the smallest nonzero outcome probability, payments above 1/eta
    can never be profitable, so the capped LP is exact for the unbounded
    optimum.
    """
    eta = smallest_positive_probability(instance)
    h = max(1.0 / eta, 1.0)
    return optimal_bounded_contract(instance, h)


def optimize_over_ccdf_candidates(
    outcomes: OutcomeSpace,
    cand_costs: Sequence[float],
    cand_tails: Sequence[np.ndarray],
    cand_extra: Sequence[Optional[int]],
    h: float,
) -> OptimalContractResult:
    """Increment-form payment-minimization LPs over explicit candidates.

    Variables are the payment increments q_0..q_{m-1} with q_0 in [0, H] and
    q_w in [-H, H]; on top of those boxes the prefix sums are constrained to
    [0, H] so the recovered payment vector is always a valid H-bounded
    contract.  Candidates carry their CCDF tail (F(1|c)..F(m-1|c)).
    """
    if h < 1:
        raise ValueError("H must be >= 1")
    m = outcomes.m
    v = outcomes.as_array()
    u_tail = np.diff(v)
    cand_costs_arr = np.asarray(cand_costs, dtype=float)
    # Rows in the LP are [F(0)=1, F(1|c), ..., F(m-1|c)].
    cand_rows = np.hstack([np.ones((len(cand_costs), 1)), np.asarray(cand_tails)])

    lower = np.concatenate([[0.0], np.full(m - 1, -float(h))])
    upper = np.full(m, float(h))
    prefix_a = []
    prefix_senses = []
    prefix_b = []
    for w in range(1, m):
        row = np.zeros(m)
        row[: w + 1] = 1.0
        prefix_a.append(row.copy())
        prefix_senses.append(">=")
        prefix_b.append(0.0)
        prefix_a.append(row)
        prefix_senses.append("<=")
        prefix_b.append(float(h))
    prefix_a = np.asarray(prefix_a)
    prefix_senses = tuple(prefix_senses)
    prefix_b = tuple(prefix_b)

    best: Optional[tuple[float, int, np.ndarray]] = None
    diags: list[ActionDiagnostic] = []
    for i in range(len(cand_costs)):
        res = _min_payment_for_candidate(
            cand_rows[i], cand_rows, cand_costs_arr, i, lower, upper,
            fixed_a=prefix_a, fixed_senses=prefix_senses, fixed_b=prefix_b,
        )
        label = float(cand_costs[i])
        if res is None:
            diags.append(ActionDiagnostic(label, "infeasible", None, None))
            continue
        payment = res.value
        value = float(v[0] + cand_rows[i][1:] @ u_tail)
        utility = value - payment
        diags.append(ActionDiagnostic(label, "optimal", float(payment), utility))
        if best is None or utility > best[0] + 1e-12:
            best = (utility, i, np.asarray(res.x))
    assert best is not None, "cost 0 is always implementable"
    utility, idx, q = best
    p = np.clip(np.cumsum(q), 0.0, h)
    return OptimalContractResult(
        contract=Contract(tuple(float(x) for x in p)),
        incentivized_action=float(cand_costs[idx]),
        principal_utility=utility,
        per_action=tuple(diags),
        extra_index=cand_extra[idx],
    )


def optimal_bounded_contract_ccdf(
    instance: CcdfInstance,
    h: float,
    extra_actions: Sequence[tuple[float, Distribution]] = (),
) -> OptimalContractResult:
    """Optimal H-bounded contract for a piecewise-linear CCDF instance.

    Enumerates breakpoint costs (non-breakpoint actions are dominated by
    breakpoint actions, since utilities are linear between breakpoints) and
    optimizes payment increments per candidate.  Extra actions with explicit
    distributions slot into the same candidate loop.
    """
    bp = instance.breakpoint_costs()
    bp = bp[(bp >= -ABS_TOL) & (bp <= 1 + ABS_TOL)]
    tails = instance.ccdf_at(np.clip(bp, 0.0, 1.0))
    cand_costs = [float(c) for c in bp]
    cand_tails = [tails[i] for i in range(len(bp))]
    cand_extra: list[Optional[int]] = [None] * len(bp)
    for idx, (cost, dist) in enumerate(extra_actions):
        cand_costs.append(float(cost))
        cand_tails.append(ccdf_from_pmf(dist.as_array())[1:])
        cand_extra.append(idx)
    return optimize_over_ccdf_candidates(
        instance.outcomes, cand_costs, cand_tails, cand_extra, h
    )


def robustify(contract: Contract, outcomes: OutcomeSpace, eps: float) -> Contract:
    """Blend a contract toward the value vector: p + (eps/2) (v - p).

    Hands the agent an eps/2 share of the principal's utility per outcome,
    which makes the contract tolerant to small misestimation of the instance.
    Preserves H-boundedness for H >= 1.  The transform itself is well-defined
    at eps = 1/2, so the right endpoint is accepted.
    """
    if not (0 < eps <= 0.5):
        raise ValueError("eps must lie in (0, 1/2]")
    if contract.m != outcomes.m:
        raise ValueError("contract / outcome dimension mismatch")
    p = contract.as_array()
    v = outcomes.as_array()
    return Contract(tuple(float(x) for x in p + 0.5 * eps * (v - p)))


def optimal_linear_contract(instance: FiniteInstance) -> tuple[float, float]:
    """Best linear contract p = rho * v: returns (rho, LIN).

    The agent's utility per action is the line rho * V_a - c_a; the optimum
    sits at rho = 0 or at an upper-envelope switch point, where tie-breaking
    hands the principal the better action at the lower rho.
    """
    values = instance.expected_values()
    costs = instance.costs()
    n = instance.n

    rhos = {0.0, 1.0}
    for i in range(n):
        for j in range(i + 1, n):
            dv = values[i] - values[j]
            if abs(dv) <= 1e-15:
                continue
            r = (costs[i] - costs[j]) / dv
            if -ABS_TOL <= r <= 1 + ABS_TOL:
                rhos.add(float(min(max(r, 0.0), 1.0)))

    best_rho, best_lin = 0.0, -np.inf
    for rho in sorted(rhos):
        agent = rho * values - costs
        tied = np.flatnonzero(agent >= agent.max() - TIE_TOL)
        lin = float((1.0 - rho) * values[tied].max())
        if lin > best_lin + 1e-12:
            best_rho, best_lin = rho, lin
    return best_rho, best_lin


@dataclass(frozen=True)
class EpsApproxResult:
    feasible: bool
    witness: Optional[tuple[float, ...]]
    cost_gap: Optional[float]
    distance: Optional[float]


def check_eps_approximation(
    target_cost: float,
    target_dist: Distribution,
    pool: FiniteInstance,
    eps: float,
    h: float,
    metric: str = "tv",
) -> EpsApproxResult:
    """Search for a mixed action matching a target cost and distribution.

    Feasible iff some mixture over the pool's actions has expected cost
    within eps^2/16 of the target and outcome distribution within
    eps^2/(32 H) in total variation (eps^2/(32 m H) in Kolmogorov distance).
    The mixture weights minimizing the distance are returned as witness.
    """
    if metric not in ("tv", "kol"):
        raise ValueError("metric must be 'tv' or 'kol'")
    n, m = pool.n, pool.m
    pmf = pool.pmf_matrix()
    costs = pool.costs()
    f_t = target_dist.as_array()
    if target_dist.m != m:
        raise ValueError("target distribution dimension mismatch")
    cost_slack = eps * eps / 16.0
    if metric == "tv":
        bound = eps * eps / (32.0 * h)
    else:
        bound = eps * eps / (32.0 * m * h)

    # Variables: n mixture weights, then m abs-slacks (tv) or 1 max-slack (kol).
    n_extra = m if metric == "tv" else 1
    nv = n + n_extra
    c = np.zeros(nv)
    rows, senses, b = [], [], []

    row = np.zeros(nv)
    row[:n] = 1.0
    rows.append(row)
    senses.append("=")
    b.append(1.0)

    row = np.zeros(nv)
    row[:n] = costs
    rows.append(row.copy())
    senses.append("<=")
    b.append(float(target_cost) + cost_slack)
    rows.append(row)
    senses.append(">=")
    b.append(float(target_cost) - cost_slack)

    if metric == "tv":
        c[n:] = 0.5
        for w in range(m):
            row = np.zeros(nv)
            row[:n] = pmf[:, w]
            row[n + w] = 1.0
            rows.append(row)
            senses.append(">=")
            b.append(float(f_t[w]))
            row = np.zeros(nv)
            row[:n] = -pmf[:, w]
            row[n + w] = 1.0
            rows.append(row)
            senses.append(">=")
            b.append(float(-f_t[w]))
    else:
        c[n] = 1.0
        ccdf = pool.ccdf_matrix()
        f_t_ccdf = target_dist.ccdf()
        for w in range(1, m):
            row = np.zeros(nv)
            row[:n] = ccdf[:, w]
            row[n] = 1.0
            rows.append(row)
            senses.append(">=")
            b.append(float(f_t_ccdf[w]))
            row = np.zeros(nv)
            row[:n] = -ccdf[:, w]
            row[n] = 1.0
            rows.append(row)
            senses.append(">=")
            b.append(float(-f_t_ccdf[w]))

    lower = np.zeros(nv)
    upper = np.concatenate([np.ones(n), np.full(n_extra, np.inf)])
    res = solve_lp(lp_problem(c, np.asarray(rows), senses, b, lower, upper))
    if res.status != "optimal":
        return EpsApproxResult(False, None, None, None)
    lam = np.asarray(res.x[:n])
    dist = float(res.value)
    gap = float(abs(target_cost - costs @ lam))
    return EpsApproxResult(dist <= bound + 1e-9, tuple(float(x) for x in lam), gap, dist)
