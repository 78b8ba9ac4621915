"""Agent best response and both parties' utilities.

Tie-breaking follows the model convention: among agent-utility-maximizing
actions the agent picks the one maximizing the principal's utility, and
among those the lowest index (finite form) or lowest cost (CCDF form), so
runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .instances import CcdfInstance, Contract, Distribution, FiniteInstance
from .tolerances import TIE_TOL


@dataclass(frozen=True)
class BestResponse:
    """Chosen action with exact utilities and the tie set it was picked from."""

    action: Union[int, float]
    agent_utility: float
    principal_utility: float
    tied: tuple
    pmf: tuple[float, ...]


def _pick(actions: Sequence, agent_u: np.ndarray, principal_u: np.ndarray, sort_key: np.ndarray):
    """Index of the winner under principal-favoring tie-breaking."""
    u_max = float(agent_u.max())
    tied = np.flatnonzero(agent_u >= u_max - TIE_TOL)
    pu_max = float(principal_u[tied].max())
    winners = tied[principal_u[tied] >= pu_max - TIE_TOL]
    best = winners[np.argmin(sort_key[winners])]
    return int(best), tied


def best_response_finite(instance: FiniteInstance, contract: Contract) -> BestResponse:
    if contract.m != instance.m:
        raise ValueError(f"contract has {contract.m} payments, instance has m={instance.m}")
    p = contract.as_array()
    v = instance.outcomes.as_array()
    pmf = instance.pmf_matrix()
    agent_u = pmf @ p - instance.costs()
    principal_u = pmf @ (v - p)
    best, tied = _pick(instance.actions, agent_u, principal_u, np.arange(instance.n))
    return BestResponse(
        action=best,
        agent_utility=float(agent_u[best]),
        principal_utility=float(principal_u[best]),
        tied=tuple(int(i) for i in tied),
        pmf=instance.actions[best].pmf,
    )


def best_response_ccdf(
    instance: CcdfInstance,
    contract: Contract,
    extra_actions: Sequence[tuple[float, Distribution]] = (),
) -> BestResponse:
    """Best response over the continuum, searched at CCDF breakpoints.

    Any non-breakpoint cost is dominated by a breakpoint cost (the utility is
    piecewise linear in cost), so the search set is the union of breakpoints
    plus cost 0 and cost_max, plus any explicitly listed extra actions.
    """
    if contract.m != instance.m:
        raise ValueError(f"contract has {contract.m} payments, instance has m={instance.m}")
    p = contract.as_array()
    v = instance.outcomes.as_array()
    q_tail = np.diff(p)
    u_tail = np.diff(v)

    costs = instance.breakpoint_costs()
    tail = instance.ccdf_at(costs)          # (k, m-1)
    payment = p[0] + tail @ q_tail
    agent_u = payment - costs
    principal_u = (v[0] - p[0]) + tail @ (u_tail - q_tail)

    cand_costs = list(costs)
    cand_agent = list(agent_u)
    cand_principal = list(principal_u)
    cand_pmf = [None] * len(costs)
    for cost, dist in extra_actions:
        f = dist.as_array()
        cand_costs.append(float(cost))
        cand_agent.append(float(f @ p - cost))
        cand_principal.append(float(f @ (v - p)))
        cand_pmf.append(tuple(dist.pmf))

    agent_arr = np.asarray(cand_agent)
    principal_arr = np.asarray(cand_principal)
    cost_arr = np.asarray(cand_costs)
    best, tied = _pick(cand_costs, agent_arr, principal_arr, cost_arr)
    if cand_pmf[best] is None:
        pmf = tuple(_pmf_from_tail(tail[best]))
    else:
        pmf = cand_pmf[best]
    return BestResponse(
        action=float(cand_costs[best]),
        agent_utility=float(agent_arr[best]),
        principal_utility=float(principal_arr[best]),
        tied=tuple(float(cost_arr[i]) for i in tied),
        pmf=pmf,
    )


def _pmf_from_tail(tail: np.ndarray):
    full = np.concatenate([[1.0], tail, [0.0]])
    return (full[:-1] - full[1:]).tolist()


def principal_utility(instance, contract: Contract) -> float:
    """Principal's expected value minus expected payment at the best response."""
    if isinstance(instance, FiniteInstance):
        return best_response_finite(instance, contract).principal_utility
    if isinstance(instance, CcdfInstance):
        return best_response_ccdf(instance, contract).principal_utility
    raise TypeError(f"unsupported instance type {type(instance)!r}")
