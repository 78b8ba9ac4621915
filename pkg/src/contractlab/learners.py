"""End-to-end learning of near-optimal bounded contracts.

Two algorithms over the seeded oracle sessions:

* Action-query learner: estimate every action's outcome distribution from
  IID samples, compute the empirically optimal H-bounded contract, and
  return its robustified version.

* Contract-query learner: an initialization step learns each complementary
  CDF through boosted threshold-contract queries, giving an empirical
  instance whose action space is {0} united with [eps^2/144, 1]; iterative
  refinement then repeatedly optimizes, robustifies, and audits the result
  with fresh contract queries, folding each too-good-to-be-known best
  response back into the empirical instance as a new zero-cost action.

The worst-case sample counts are astronomically conservative, so the
config exposes the leading constant and, for the initialization step, the
oracle accuracy knobs; defaults reproduce the formulas, experiments pass
relaxed values and audit the result against ground truth instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .instances import (
    Contract,
    Distribution,
    FiniteInstance,
    OutcomeSpace,
    ccdf_from_pmf,
    empirical_distribution,
)
from .learning import learn_concave, slope_grid_size
from .optimize import (
    OptimalContractResult,
    optimal_bounded_contract,
    optimize_over_ccdf_candidates,
    robustify,
)
from .oracles import (
    ACTION_QUERY,
    CONTRACT_QUERY,
    OracleSession,
    query_action_batch,
    query_contract_batch,
    subgradient_query,
)
from .piecewise import PiecewiseLinearFn, clip_above, pl_min, simplify_concave


@dataclass(frozen=True)
class LearnerConfig:
    """Accuracy targets plus the knobs replacing 'sufficiently large C'."""

    eps: float
    delta: float
    h: float = 1.0
    sample_constant_c: float = 1.0
    max_refinement_iterations: Optional[int] = None
    rng_seed: int = 0
    # Initialization relaxation; None means the worst-case default formula.
    init_concave_eps: Optional[float] = None
    init_oracle_eps: Optional[float] = None
    init_oracle_delta: Optional[float] = None
    simplify_tol: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0 < self.eps < 0.5):
            raise ValueError("eps must lie in (0, 1/2)")
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if self.h < 1:
            raise ValueError("H must be >= 1")
        if self.sample_constant_c <= 0:
            raise ValueError("sample constant must be positive")


@dataclass(frozen=True)
class IterationDiagnostic:
    iteration: int
    empirical_opt: float
    estimated_utility: float
    incentivized_cost: float
    queries: int


@dataclass(frozen=True)
class LearnerReport:
    """Everything a harness needs to audit one learning run."""

    contract: Contract
    estimated_utility: float
    query_count: int
    iterations: int
    bound_exceeded: bool
    eps: float
    h: float
    rng_seed: int
    diagnostics: tuple[IterationDiagnostic, ...] = ()
    added_distributions: tuple[Distribution, ...] = ()
    true_utility: Optional[float] = None
    opt_h_truth: Optional[float] = None


@dataclass(frozen=True)
class EmpiricalInstance:
    """Learned instance: CCDFs on [cost_lo, 1] plus explicit cost-0 actions.

    zero_cost_actions[0] is always the initialization action carrying the
    learned distribution at cost_lo; refinement appends further cost-0
    actions.
    """

    outcomes: OutcomeSpace
    ccdf: tuple[PiecewiseLinearFn, ...]
    cost_lo: float
    zero_cost_actions: tuple[Distribution, ...]

    @property
    def m(self) -> int:
        return self.outcomes.m

    def with_added_action(self, dist: Distribution) -> "EmpiricalInstance":
        return replace(self, zero_cost_actions=self.zero_cost_actions + (dist,))

    def candidates(self) -> tuple[list[float], list[np.ndarray], list[Optional[int]]]:
        """Candidate (cost, CCDF tail) list for the breakpoint LP."""
        costs: list[float] = []
        tails: list[np.ndarray] = []
        extra: list[Optional[int]] = []
        for idx, dist in enumerate(self.zero_cost_actions):
            costs.append(0.0)
            tails.append(ccdf_from_pmf(dist.as_array())[1:])
            extra.append(idx)
        grid = sorted({float(x) for fn in self.ccdf for x in fn.xs})
        for c in grid:
            costs.append(c)
            tails.append(np.array([fn.eval(c) for fn in self.ccdf]))
            extra.append(None)
        return costs, tails, extra

    def optimal_bounded_contract(self, h: float) -> OptimalContractResult:
        costs, tails, extra = self.candidates()
        return optimize_over_ccdf_candidates(self.outcomes, costs, tails, extra, h)

    def distribution_at(self, cost: float) -> Distribution:
        tail = np.array([fn.eval(cost) for fn in self.ccdf])
        pmf = np.maximum(np.concatenate([[1.0], tail]) - np.concatenate([tail, [0.0]]), 0.0)
        return Distribution(tuple(float(x) for x in pmf / pmf.sum()))


# ---------------------------------------------------------------------------
# Action-query learner
# ---------------------------------------------------------------------------


def action_query_sample_count(config: LearnerConfig, n: int, m: int) -> int:
    """Per-action sample count C H^2 (m + log2(n / delta)) / eps^4."""
    raw = (
        config.sample_constant_c
        * config.h ** 2
        * (m + math.log2(n / config.delta))
        / config.eps ** 4
    )
    return max(1, math.ceil(raw))


def learn_action_query(
    session: OracleSession, costs: Sequence[float], config: LearnerConfig
) -> LearnerReport:
    """Sample every action, optimize empirically, robustify.

    The action set and its costs are known in this model; only the outcome
    distributions are estimated.
    """
    if session.mode != ACTION_QUERY:
        raise ValueError("session is not in action-query mode")
    inst = session.instance
    if not isinstance(inst, FiniteInstance):
        raise ValueError("action queries need a finite instance")
    if len(costs) != inst.n:
        raise ValueError(f"cost list has {len(costs)} entries, instance has {inst.n} actions")
    start = session.query_count
    n_per_action = action_query_sample_count(config, inst.n, inst.m)
    from .instances import Action  # local import to avoid a cycle at module load

    actions = []
    for i in range(inst.n):
        outcomes = query_action_batch(session, i, n_per_action)
        dist = empirical_distribution(outcomes, inst.m)
        actions.append(Action(float(costs[i]), dist.pmf))
    empirical = FiniteInstance(inst.outcomes, tuple(actions))
    result = optimal_bounded_contract(empirical, config.h)
    contract = robustify(result.contract, inst.outcomes, config.eps)
    return LearnerReport(
        contract=contract,
        estimated_utility=result.principal_utility,
        query_count=session.query_count - start,
        iterations=0,
        bound_exceeded=False,
        eps=config.eps,
        h=config.h,
        rng_seed=session.rng_seed,
    )


# ---------------------------------------------------------------------------
# Contract-query learner
# ---------------------------------------------------------------------------


def _init_parameters(config: LearnerConfig, m: int) -> tuple[float, float, float]:
    """(concave-learning eps, oracle eps, oracle delta) for initialization."""
    eps_cc = config.init_concave_eps
    if eps_cc is None:
        eps_cc = config.eps ** 2 / (288.0 * m * config.h)
    eps_or = config.init_oracle_eps
    if eps_or is None:
        eps_or = eps_cc ** 4 / 64.0
    delta_or = config.init_oracle_delta
    if delta_or is None:
        n_queries = (m - 1) * (2 * slope_grid_size(0.5 * eps_cc * eps_cc) + 1)
        delta_or = config.delta / (2.0 * max(n_queries, 1))
    return eps_cc, eps_or, delta_or


def initialize_contract_query(session: OracleSession, config: LearnerConfig) -> EmpiricalInstance:
    """Learn every complementary CDF and assemble the empirical instance.

    Per outcome threshold the concave learner drives the boosted threshold
    -contract oracle; the learned curves are clipped to [0, 1], optionally
    sparsified inside an upward band, and nested by cumulative pointwise
    minimum (independent noisy learners can cross, which would make the
    instance invalid).  The action space becomes {0} on the learned
    distribution at cost_lo = eps^2/144 plus the continuum [cost_lo, 1].
    """
    if session.mode != CONTRACT_QUERY:
        raise ValueError("session is not in contract-query mode")
    m = session.m
    outcomes = session.instance.outcomes
    eps_cc, eps_or, delta_or = _init_parameters(config, m)

    fns: list[PiecewiseLinearFn] = []
    for omega in range(1, m):
        oracle = lambda r, _w=omega: subgradient_query(session, _w, r, eps_or, delta_or)
        fn = learn_concave(oracle, eps_cc)
        fn = clip_above(fn, 1.0)
        if config.simplify_tol is not None:
            fn = clip_above(simplify_concave(fn, config.simplify_tol), 1.0)
        fns.append(fn)
    for i in range(1, len(fns)):
        fns[i] = pl_min(fns[i - 1], fns[i])

    cost_lo = config.eps ** 2 / 144.0
    restricted = tuple(fn.restricted(cost_lo, 1.0) for fn in fns)
    empirical = EmpiricalInstance(outcomes, restricted, cost_lo, ())
    init_dist = empirical.distribution_at(cost_lo)
    return replace(empirical, zero_cost_actions=(init_dist,))


def refinement_sample_count(config: LearnerConfig, m: int) -> int:
    """Per-iteration query count C m^3 H^2 log2(m H / (delta eps)) / eps^4."""
    raw = (
        config.sample_constant_c
        * m ** 3
        * config.h ** 2
        * math.log2(m * config.h / (config.delta * config.eps))
        / config.eps ** 4
    )
    return max(1, math.ceil(raw))


def refinement_iteration_bound(config: LearnerConfig, m: int) -> int:
    """Packing bound on refinement iterations: 576 m^2 H / eps^2."""
    bound = math.ceil(576.0 * m * m * config.h / config.eps ** 2)
    if config.max_refinement_iterations is not None:
        bound = min(bound, config.max_refinement_iterations)
    return max(1, bound)


def refine_contract_query(
    session: OracleSession, empirical: EmpiricalInstance, config: LearnerConfig
) -> LearnerReport:
    """Optimize-robustify-audit loop on the empirical instance.

    The robustification parameter is eps/3: that is the approximation level
    at which the dichotomy argument runs (the eps^2/144 cost threshold is
    exactly the eps/3-approximation cost slack), so each appended action
    keeps an eps/3-approximation in the true instance.  Termination follows
    the estimated-utility test against the empirical optimum minus eps/2;
    exceeding the packing bound is reported, not raised, and returns the
    best contract seen.
    """
    if session.mode != CONTRACT_QUERY:
        raise ValueError("session is not in contract-query mode")
    m = session.m
    v = empirical.outcomes.as_array()
    start = session.query_count
    n_per_iter = refinement_sample_count(config, m)
    max_iters = refinement_iteration_bound(config, m)

    diagnostics: list[IterationDiagnostic] = []
    added: list[Distribution] = []
    best: Optional[tuple[float, Contract]] = None
    for iteration in range(1, max_iters + 1):
        result = empirical.optimal_bounded_contract(config.h)
        contract = robustify(result.contract, empirical.outcomes, config.eps / 3.0)
        outcomes = query_contract_batch(session, contract, n_per_iter)
        estimate = empirical_distribution(outcomes, m)
        est_utility = float(estimate.as_array() @ (v - contract.as_array()))
        diagnostics.append(
            IterationDiagnostic(
                iteration=iteration,
                empirical_opt=result.principal_utility,
                estimated_utility=est_utility,
                incentivized_cost=float(result.incentivized_action),
                queries=n_per_iter,
            )
        )
        if best is None or est_utility > best[0]:
            best = (est_utility, contract)
        if est_utility >= result.principal_utility - config.eps / 2.0:
            return LearnerReport(
                contract=contract,
                estimated_utility=est_utility,
                query_count=session.query_count - start,
                iterations=iteration,
                bound_exceeded=False,
                eps=config.eps,
                h=config.h,
                rng_seed=session.rng_seed,
                diagnostics=tuple(diagnostics),
                added_distributions=tuple(added),
            )
        empirical = empirical.with_added_action(estimate)
        added.append(estimate)
    est_utility, contract = best
    return LearnerReport(
        contract=contract,
        estimated_utility=est_utility,
        query_count=session.query_count - start,
        iterations=max_iters,
        bound_exceeded=True,
        eps=config.eps,
        h=config.h,
        rng_seed=session.rng_seed,
        diagnostics=tuple(diagnostics),
        added_distributions=tuple(added),
    )


def learn_contract_query(session: OracleSession, config: LearnerConfig) -> LearnerReport:
    """Initialization followed by iterative refinement."""
    start = session.query_count
    empirical = initialize_contract_query(session, config)
    report = refine_contract_query(session, empirical, config)
    return replace(report, query_count=session.query_count - start)
