import numpy as np
import pytest

from contractlab.agent import best_response_ccdf, best_response_finite
from contractlab.hardness import (
    HardnessParams,
    gen_additive_hardness,
    gen_multiplicative_hardness,
    gen_random_finite,
    gen_random_fosd_cdfp,
)
from contractlab.instances import (
    Action,
    Contract,
    Distribution,
    FiniteInstance,
    OutcomeSpace,
    to_ccdf_instance,
)
from contractlab.optimize import (
    check_eps_approximation,
    optimal_bounded_contract,
    optimal_bounded_contract_ccdf,
    optimal_general_contract,
    optimal_linear_contract,
    robustify,
    smallest_positive_probability,
)


@pytest.fixture(scope="module")
def additive():
    return gen_additive_hardness(HardnessParams(0.01, 1.0))


@pytest.fixture(scope="module")
def null_only():
    return FiniteInstance(OutcomeSpace((0.3, 1.0)), (Action(0.0, (1.0, 0.0)),))


def test_additive_bounded_h25(additive):
    res = optimal_bounded_contract(additive, 25.0)
    assert res.principal_utility == pytest.approx(0.75)
    assert res.incentivized_action == 2
    assert res.contract.is_bounded_by(25.0)


def test_additive_bounded_h1_range(additive):
    res = optimal_bounded_contract(additive, 1.0)
    # Known bounds: the explicit contract (0, 0.02, 0.02) gives 0.49, and the
    # payment bound caps utility at 1 - 1/2 (1 - 4 eps) + eps (1 - 8 eps).
    assert 0.49 - 1e-9 <= res.principal_utility <= 1 - 0.5 * (1 - 0.04) + 0.01 * (1 - 0.08) + 1e-9
    assert res.contract.is_bounded_by(1.0)


def test_null_only_instance(null_only):
    res = optimal_bounded_contract(null_only, 1.0)
    assert res.principal_utility == pytest.approx(0.3)
    res = optimal_general_contract(null_only)
    assert res.principal_utility == pytest.approx(0.3)


def test_additive_general(additive):
    assert smallest_positive_probability(additive) == pytest.approx(4e-4)
    res = optimal_general_contract(additive)
    assert res.principal_utility == pytest.approx(0.75, abs=1e-6)


def test_multiplicative_general():
    gen = gen_multiplicative_hardness(HardnessParams(0.01, 1.0, 200))
    res = optimal_general_contract(gen.finite)
    assert res.principal_utility == pytest.approx(0.01 * (1 + np.log(100)), abs=2e-3)


def test_infeasible_actions_recorded_not_fatal():
    # The second action pays off only on an outcome it can barely reach, so no
    # 1-bounded contract can cover its cost.
    inst = FiniteInstance(
        OutcomeSpace((0.0, 1.0)),
        (Action(0.0, (1.0, 0.0)), Action(0.9, (0.5, 0.5)), Action(0.95, (0.45, 0.55))),
    )
    res = optimal_bounded_contract(inst, 1.0)
    statuses = {d.label: d.status for d in res.per_action}
    assert statuses[2] == "infeasible"
    assert res.principal_utility >= 0.0


def test_ic_certification_finite(rng):
    for trial in range(40):
        inst = gen_random_finite(int(rng.integers(2, 5)), int(rng.integers(2, 7)), 6100 + trial)
        res = optimal_bounded_contract(inst, 1.0)
        br = best_response_finite(inst, res.contract)
        assert res.incentivized_action in br.tied
        assert br.principal_utility == pytest.approx(res.principal_utility, abs=1e-6)


def test_ic_certification_ccdf(rng):
    for trial in range(25):
        inst = gen_random_fosd_cdfp(int(rng.integers(2, 5)), int(rng.integers(1, 5)), 6400 + trial)
        res = optimal_bounded_contract_ccdf(inst, 1.0)
        br = best_response_ccdf(inst, res.contract)
        assert any(abs(res.incentivized_action - t) <= 1e-7 for t in br.tied)
        assert br.principal_utility == pytest.approx(res.principal_utility, abs=1e-6)


def test_monotone_in_h(rng):
    for trial in range(100):
        inst = gen_random_finite(int(rng.integers(2, 5)), int(rng.integers(2, 6)), 6700 + trial)
        h1, h2 = sorted(rng.uniform(1.0, 8.0, size=2))
        a = optimal_bounded_contract(inst, h1).principal_utility
        b = optimal_bounded_contract(inst, h2).principal_utility
        assert a <= b + 1e-7


def test_ccdf_single_action_matches_finite():
    inst = FiniteInstance(
        OutcomeSpace((0.0, 0.4, 1.0)),
        (Action(0.0, (1.0, 0.0, 0.0)), Action(0.3, (0.2, 0.5, 0.3))),
    )
    direct = optimal_bounded_contract(inst, 1.0)
    via_ccdf = optimal_bounded_contract_ccdf(to_ccdf_instance(inst), 1.0)
    assert via_ccdf.principal_utility == pytest.approx(direct.principal_utility, abs=1e-9)


def test_ccdf_fig_table_matches_payment_grid(fig_table):
    cc = to_ccdf_instance(fig_table)
    res = optimal_bounded_contract_ccdf(cc, 1.0)

    # Brute-force oracle: scan a 50^3 grid of payment vectors (p0 = 0 loses
    # nothing: shifting all payments down is weakly better), agent chooses
    # among breakpoint costs with principal-favoring tie-breaking.
    grid = np.linspace(0.0, 1.0, 50)
    p1, p2, p3 = np.meshgrid(grid, grid, grid, indexing="ij")
    pays = np.stack([np.zeros_like(p1), p1, p2, p3], axis=-1).reshape(-1, 4)
    costs = cc.breakpoint_costs()
    tails = cc.ccdf_at(costs)                      # (k, 3)
    v = np.array(fig_table.outcomes.values)
    u_tail = np.diff(v)
    q_tail = np.diff(pays, axis=1)                 # (N, 3)
    agent = q_tail @ tails.T - costs               # (N, k)
    value = tails @ u_tail                         # (k,)
    principal = value[None, :] - (q_tail @ tails.T)
    best_agent = agent.max(axis=1, keepdims=True)
    tied = agent >= best_agent - 1e-7
    principal_best = np.where(tied, principal, -np.inf).max(axis=1)
    oracle = float(principal_best.max())
    assert res.principal_utility == pytest.approx(oracle, abs=0.02)


def test_ccdf_dominant_zero_cost_extra_action(fig_table):
    cc = to_ccdf_instance(fig_table)
    strong = Distribution((0.0, 0.0, 0.0, 1.0))
    res = optimal_bounded_contract_ccdf(cc, 1.0, extra_actions=[(0.0, strong)])
    # A free point mass on the best outcome is incentivized at zero expected
    # payment, so the principal keeps that action's full expected value.
    assert res.extra_index == 0
    assert res.principal_utility == pytest.approx(1.0)
    assert strong.as_array() @ res.contract.as_array() == pytest.approx(0.0, abs=1e-9)


def test_robustify_examples():
    out = OutcomeSpace((0.0, 1.0))
    assert robustify(Contract((0.0, 0.4)), out, 0.5).payments == pytest.approx((0.0, 0.55))
    assert robustify(Contract((0.0, 1.0)), out, 0.2).payments == pytest.approx((0.0, 1.0))
    assert robustify(Contract((0.0, 0.0)), out, 0.2).payments == pytest.approx((0.0, 0.1))
    with pytest.raises(ValueError):
        robustify(Contract((0.0, 0.0)), out, 0.6)
    with pytest.raises(ValueError):
        robustify(Contract((0.0, 0.0)), out, 0.0)


def test_robustify_preserves_bound(rng):
    out = OutcomeSpace((0.0, 0.5, 1.0))
    for _ in range(100):
        h = float(rng.uniform(1.0, 5.0))
        p = Contract(tuple(rng.uniform(0, h, 3)))
        r = robustify(p, out, float(rng.uniform(0.01, 0.49)))
        assert r.is_bounded_by(h)


def test_linear_contract_single_action():
    inst = FiniteInstance(
        OutcomeSpace((0.0, 1.0)),
        (Action(0.0, (1.0, 0.0)), Action(0.25, (0.0, 1.0))),
    )
    rho, lin = optimal_linear_contract(inst)
    assert rho == pytest.approx(0.25)
    assert lin == pytest.approx(0.75)


def test_linear_contract_null_only(null_only):
    rho, lin = optimal_linear_contract(null_only)
    assert rho == 0.0
    assert lin == pytest.approx(0.3)


def test_linear_contract_matches_grid_scan(additive):
    rho, lin = optimal_linear_contract(additive)
    # Dense-grid oracle with the same principal-favoring tie-breaking.
    values = additive.expected_values()
    costs = additive.costs()
    best = 0.0
    for r in np.linspace(0.0, 1.0, 100001):
        agent = r * values - costs
        tied = agent >= agent.max() - 1e-9
        best = max(best, (1 - r) * values[tied].max())
    assert lin == pytest.approx(best, abs=1e-4)
    assert rho == pytest.approx(0.48)


def test_lin_between_bounds(rng):
    for trial in range(60):
        inst = gen_random_finite(int(rng.integers(2, 5)), int(rng.integers(2, 6)), 9100 + trial)
        _, lin = optimal_linear_contract(inst)
        opt_h1 = optimal_bounded_contract(inst, 1.0).principal_utility
        opt = optimal_general_contract(inst).principal_utility
        assert lin <= opt_h1 + 1e-7
        assert opt_h1 <= opt + 1e-7


def test_eps_approx_pool_action_is_feasible(additive):
    a = additive.actions[1]
    res = check_eps_approximation(a.cost, Distribution(a.pmf), additive, 0.3, 1.0, "tv")
    assert res.feasible
    assert max(res.witness) == pytest.approx(1.0, abs=1e-7)


def test_eps_approx_disjoint_support_infeasible():
    inst = FiniteInstance(OutcomeSpace((0.0, 0.5, 1.0)), (Action(0.0, (1.0, 0.0, 0.0)),))
    res = check_eps_approximation(0.0, Distribution((0.0, 0.0, 1.0)), inst, 0.1, 1.0, "kol")
    assert not res.feasible


def test_eps_approx_midpoint_mixture(additive):
    a, b = additive.actions[1], additive.actions[2]
    target_cost = 0.5 * (a.cost + b.cost)
    target = Distribution(tuple(0.5 * (np.array(a.pmf) + np.array(b.pmf))))
    res = check_eps_approximation(target_cost, target, additive, 0.2, 1.0, "tv")
    assert res.feasible
    assert res.witness[1] == pytest.approx(0.5, abs=1e-6)
    assert res.witness[2] == pytest.approx(0.5, abs=1e-6)


def test_eps_approx_metric_validation(additive):
    with pytest.raises(ValueError):
        check_eps_approximation(0.0, Distribution((1.0, 0.0, 0.0)), additive, 0.1, 1.0, "w1")


def test_ccdf_random_instances_match_payment_grid():
    # Independent oracle: dense payment grid with p0 = 0 cross-checked on a
    # dense action grid, principal-favoring tie-breaking included.
    rng = np.random.default_rng(10)
    from contractlab.hardness import gen_random_fosd_cdfp

    for trial in range(8):
        m = int(rng.integers(2, 4))
        inst = gen_random_fosd_cdfp(m, int(rng.integers(1, 5)), seed=40000 + trial)
        res = optimal_bounded_contract_ccdf(inst, 1.0)
        n_p = 41 if m == 3 else 201
        grids = [np.linspace(0, 1, n_p)] * (m - 1)
        mesh = np.meshgrid(*grids, indexing="ij")
        pays = np.stack([np.zeros_like(mesh[0])] + list(mesh), axis=-1).reshape(-1, m)
        costs = np.linspace(0, 1, 2001)
        tails = inst.ccdf_at(costs)
        v = np.asarray(inst.outcomes.values)
        q_tail = np.diff(pays, axis=1)
        agent = q_tail @ tails.T - costs
        value = v[0] + tails @ np.diff(v)
        principal = value[None, :] - (q_tail @ tails.T)
        tied = agent >= agent.max(axis=1, keepdims=True) - 1e-7
        oracle = float(np.where(tied, principal, -np.inf).max(axis=1).max())
        assert res.principal_utility >= oracle - 1e-6
        br = best_response_ccdf(inst, res.contract)
        assert br.principal_utility == pytest.approx(res.principal_utility, abs=1e-6)


def test_plateau_and_certification_with_tiny_probabilities():
    # Spiky pmfs push eta toward 1e-9; the 1/eta-capped LP must stay exact.
    rng = np.random.default_rng(2)
    from contractlab.instances import validate_finite

    done = 0
    while done < 15:
        m = int(rng.integers(2, 6))
        n = int(rng.integers(2, 9))
        actions = [Action(0.0, (1.0,) + (0.0,) * (m - 1))]
        for _ in range(n - 1):
            pmf = rng.dirichlet(np.full(m, 0.12))
            pmf = np.maximum(pmf, 0)
            pmf /= pmf.sum()
            actions.append(Action(float(rng.uniform(0, 0.9)), tuple(float(p) for p in pmf)))
        inst = FiniteInstance(OutcomeSpace(tuple(np.sort(rng.uniform(0, 1, m)))), tuple(actions))
        if not validate_finite(inst).ok:
            continue
        done += 1
        eta = smallest_positive_probability(inst)
        a = optimal_bounded_contract(inst, max(1 / eta, 1.0))
        b = optimal_bounded_contract(inst, max(10 / eta, 1.0))
        assert abs(a.principal_utility - b.principal_utility) <= 1e-6
        br = best_response_finite(inst, a.contract)
        assert br.principal_utility == pytest.approx(a.principal_utility, abs=1e-6)
