import math

import numpy as np
import pytest

from contractlab.agent import best_response_finite
from contractlab.fileio import instance_to_json
from contractlab.hardness import (
    HardnessParams,
    discretize_ccdf,
    gen_additive_hardness,
    gen_multiplicative_hardness,
    gen_random_finite,
    gen_random_fosd_cdfp,
    verify_gap,
    verify_mixed_approx,
)
from contractlab.instances import (
    Action,
    FiniteInstance,
    OutcomeSpace,
    check_cdfp,
    check_fosd,
    validate_ccdf,
    validate_finite,
)


def test_params_validation():
    with pytest.raises(ValueError):
        HardnessParams(eps=1.5)
    with pytest.raises(ValueError):
        HardnessParams(eps=0.01, h=0.2)
    with pytest.raises(ValueError):
        gen_additive_hardness(HardnessParams(eps=0.2))


def test_multiplicative_instance_shape():
    gen = gen_multiplicative_hardness(HardnessParams(0.01, 1.0, 200))
    assert gen.finite.actions[-1].cost == pytest.approx(1 - 0.01 - 0.01 * math.log(100.0))
    assert gen.finite.ccdf_matrix()[-1, 1] == pytest.approx(1.0)
    assert gen.optimal_utility == pytest.approx(0.01 * (1 + math.log(100.0)))
    assert validate_ccdf(gen.ccdf).ok
    # Contract (0, 0, 2H/eps) ties every action at zero agent utility and
    # tie-breaks to the top of the grid.
    br = best_response_finite(gen.finite, gen.optimal_contract)
    assert br.agent_utility == pytest.approx(0.0, abs=1e-12)
    assert br.principal_utility == pytest.approx(gen.optimal_utility, abs=1e-9)


def test_multiplicative_valid_even_near_eps_one():
    # On the grid a <= ln(1/eps), F(1|c) = eps e^a caps at exactly 1, so the
    # probability-overflow guard cannot fire for any eps accepted by
    # HardnessParams; eps >= 1 is rejected at parameter construction.
    gen = gen_multiplicative_hardness(HardnessParams(0.9, 1.0, 10))
    assert validate_finite(gen.finite).ok
    with pytest.raises(ValueError):
        HardnessParams(1.0, 1.0, 10)


def test_additive_pmf_values():
    inst = gen_additive_hardness(HardnessParams(0.01, 1.0))
    assert inst.actions[1].pmf == pytest.approx((0.5, 0.4996, 0.0004))
    assert inst.actions[2].pmf == pytest.approx((0.0, 0.99, 0.01))
    assert check_fosd(inst)[0] and check_cdfp(inst)[0]


def test_additive_gap_report():
    inst = gen_additive_hardness(HardnessParams(0.01, 1.0))
    rep = verify_gap(inst, 1.0)
    assert rep.opt == pytest.approx(0.75, abs=1e-6)
    assert 0.49 <= rep.opt_h <= 0.5292
    assert rep.gap >= 0.22


def test_multiplicative_ratio_at_tiny_eps():
    gen = gen_multiplicative_hardness(HardnessParams(math.exp(-9), 1.0, 400))
    rep = verify_gap(gen.finite, 1.0, gen.optimal_contract)
    assert rep.ratio >= 3.0
    assert rep.opt_h <= 3 * math.exp(-9) + 1e-9


def test_null_only_gap_is_trivial():
    inst = FiniteInstance(OutcomeSpace((0.4, 1.0)), (Action(0.0, (1.0, 0.0)),))
    rep = verify_gap(inst, 1.0)
    assert rep.ratio == pytest.approx(1.0)
    assert rep.gap == pytest.approx(0.0, abs=1e-12)


def test_mixed_approx_trivial_at_large_eps():
    inst = gen_additive_hardness(HardnessParams(0.01, 1.0))
    rows = verify_mixed_approx(inst, [0.499])
    grid_rows = [r for r in rows if r.source == "grid"]
    assert grid_rows[0].holds


def test_mixed_approx_random_instances(rng):
    bad = 0
    for trial in range(30):
        inst = gen_random_finite(int(rng.integers(2, 5)), int(rng.integers(2, 7)), 501 + trial)
        for row in verify_mixed_approx(inst, [0.125, 1 / 32]):
            bad += not row.holds
    assert bad == 0


def test_mixed_approx_ratio_tracks_log_opt():
    # As eps shrinks the multiplicative family's OPT/LIN ratio grows like
    # log(1/OPT): check the three-point slope stays within a factor of 2.
    ratios = []
    opts = []
    for eps in (math.exp(-4), math.exp(-6), math.exp(-8)):
        gen = gen_multiplicative_hardness(HardnessParams(eps, 1.0, 150))
        from contractlab.optimize import optimal_linear_contract

        _, lin = optimal_linear_contract(gen.finite)
        opt = best_response_finite(gen.finite, gen.optimal_contract).principal_utility
        ratios.append(opt / lin)
        opts.append(opt)
    for i in (0, 1):
        growth = ratios[i + 1] / ratios[i]
        predicted = math.log(1 / opts[i + 1]) / math.log(1 / opts[i])
        assert 0.5 * predicted <= growth <= 2.0 * predicted


def test_random_generators_always_valid_and_deterministic():
    for seed in range(25):
        cc = gen_random_fosd_cdfp(3, 3, seed)
        assert validate_ccdf(cc).ok
        fin = gen_random_finite(4, 5, seed)
        assert validate_finite(fin).ok
    a = instance_to_json(gen_random_fosd_cdfp(3, 3, 11))
    b = instance_to_json(gen_random_fosd_cdfp(3, 3, 11))
    assert a == b
    assert gen_random_finite(4, 5, 3) == gen_random_finite(4, 5, 3)


def test_degenerate_single_segment_ccdf():
    cc = gen_random_fosd_cdfp(2, 1, seed=9)
    assert len(cc.ccdf) == 1
    assert validate_ccdf(cc).ok


def test_discretize_preserves_assumptions():
    rng = np.random.default_rng(5)
    for trial in range(20):
        cc = gen_random_fosd_cdfp(int(rng.integers(2, 5)), int(rng.integers(1, 5)), 100 + trial)
        costs = rng.uniform(0.01, cc.cost_max, size=int(rng.integers(2, 8)))
        fin = discretize_ccdf(cc, costs)
        assert validate_finite(fin).ok
        assert check_fosd(fin)[0]
        assert check_cdfp(fin)[0]
