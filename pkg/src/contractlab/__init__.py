"""contractlab: exact solving, simulation, and query-efficient learning of
bounded contracts for the hidden-action principal-agent problem."""

from .agent import BestResponse, best_response_ccdf, best_response_finite, principal_utility
from .instances import (
    Action,
    CcdfInstance,
    Contract,
    Distribution,
    FiniteInstance,
    OutcomeSpace,
    check_cdfp,
    check_fosd,
    empirical_distribution,
    kol_distance,
    null_contract,
    to_ccdf_instance,
    tv_distance,
    validate_ccdf,
    validate_finite,
)
from .fileio import load_instance, parse_instance, save_instance
from .hardness import (
    HardnessParams,
    discretize_ccdf,
    gen_additive_hardness,
    gen_multiplicative_hardness,
    gen_random_finite,
    gen_random_fosd_cdfp,
    verify_gap,
    verify_mixed_approx,
)
from .learners import (
    EmpiricalInstance,
    LearnerConfig,
    LearnerReport,
    initialize_contract_query,
    learn_action_query,
    learn_contract_query,
    refine_contract_query,
)
from .learning import learn_concave, learn_convex
from .lp import LpProblem, LpResult, lp_problem, solve_lp
from .optimize import (
    OptimalContractResult,
    check_eps_approximation,
    optimal_bounded_contract,
    optimal_bounded_contract_ccdf,
    optimal_general_contract,
    optimal_linear_contract,
    robustify,
)
from .oracles import (
    ACTION_QUERY,
    CONTRACT_QUERY,
    OracleSession,
    ThresholdContract,
    derive_seed,
    query_action,
    query_contract,
    subgradient_query,
)
from .piecewise import PiecewiseLinearFn, concave_closure, pl_eval, pl_inverse, pl_subgradient

__version__ = "0.1.0"
