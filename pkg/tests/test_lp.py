import numpy as np
import pytest
from scipy.optimize import linprog

from contractlab.lp import lp_problem, solve_lp


def test_max_x_below_three():
    res = solve_lp(lp_problem([1.0], [[1.0]], ["<="], [3.0], [0.0], [np.inf], maximize=True))
    assert res.status == "optimal"
    assert res.value == pytest.approx(3.0)
    assert res.x[0] == pytest.approx(3.0)


def test_unbounded_detected():
    res = solve_lp(lp_problem([1.0], [], [], [], [0.0], [np.inf], maximize=True))
    assert res.status == "unbounded"


def test_infeasible_detected():
    res = solve_lp(
        lp_problem([1.0], [[1.0], [1.0]], ["<=", ">="], [1.0, 2.0], [0.0], [np.inf])
    )
    assert res.status == "infeasible"


def test_equality_constraints():
    # min x + y s.t. x + y = 1, x - y = 0 -> (0.5, 0.5)
    res = solve_lp(
        lp_problem(
            [1.0, 1.0], [[1.0, 1.0], [1.0, -1.0]], ["=", "="], [1.0, 0.0],
            [0.0, 0.0], [np.inf, np.inf],
        )
    )
    assert res.status == "optimal"
    assert res.x == pytest.approx((0.5, 0.5))


def test_additive_hardness_action2_payment_bound():
    # Incentivizing the costly action of the additive-hardness family with
    # 1-bounded payments needs expected payment at least
    # 1/2 (1 - 4 eps) - eps (1 - 8 eps).
    eps = 0.01
    f2 = np.array([0.0, 1 - eps, eps])
    f1 = np.array([0.5, 0.5 - 4 * eps**2, 4 * eps**2])
    f0 = np.array([1.0, 0.0, 0.0])
    rows = [list(f2 - f1), list(f2 - f0)]
    b = [0.25 - eps, 0.25]
    res = solve_lp(lp_problem(list(f2), rows, [">=", ">="], b, [0.0] * 3, [1.0] * 3))
    assert res.status == "optimal"
    assert res.value >= 0.5 * (1 - 4 * eps) - eps * (1 - 8 * eps) - 1e-9


def test_matches_reference_solver_on_random_lps():
    # 200 feasible-by-construction problems (b offset from a point inside the
    # box) so the value comparison actually exercises optimality.
    rng = np.random.default_rng(99)
    checked = 0
    for trial in range(200):
        n = int(rng.integers(1, 13))
        k = int(rng.integers(1, 21))
        c = rng.normal(size=n)
        a = rng.normal(size=(k, n))
        lower = rng.uniform(-2, 0, n)
        upper = rng.uniform(0, 2, n)
        x0 = rng.uniform(lower, upper)
        senses = [str(s) for s in rng.choice(["<=", ">=", "="], size=k)]
        slack = rng.uniform(0, 1, k)
        b = a @ x0 + np.where(np.array(senses) == "<=", slack, np.where(np.array(senses) == ">=", -slack, 0.0))
        res = solve_lp(lp_problem(c, a, senses, b, lower, upper))

        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for row, s, rhs in zip(a, senses, b):
            if s == "<=":
                a_ub.append(row)
                b_ub.append(rhs)
            elif s == ">=":
                a_ub.append(-row)
                b_ub.append(-rhs)
            else:
                a_eq.append(row)
                b_eq.append(rhs)
        ref = linprog(
            c,
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=b_ub or None,
            A_eq=np.array(a_eq) if a_eq else None,
            b_eq=b_eq or None,
            bounds=list(zip(lower, upper)),
            method="highs",
        )
        ref_status = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
        assert res.status == ref_status, f"trial {trial}"
        if res.status == "optimal":
            assert res.value == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)
            checked += 1
    assert checked >= 195


def test_status_agreement_on_mixed_random_lps():
    rng = np.random.default_rng(123)
    for trial in range(150):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, 13))
        c = rng.normal(size=n)
        a = rng.normal(size=(k, n))
        b = rng.normal(size=k)
        senses = [str(s) for s in rng.choice(["<=", ">=", "="], size=k)]
        lower = np.where(rng.random(n) < 0.8, rng.uniform(-2, 0, n), -np.inf)
        upper = np.where(rng.random(n) < 0.8, rng.uniform(0, 2, n), np.inf)
        upper = np.maximum(upper, lower)
        res = solve_lp(lp_problem(c, a, senses, b, lower, upper))

        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for row, s, rhs in zip(a, senses, b):
            if s == "<=":
                a_ub.append(row)
                b_ub.append(rhs)
            elif s == ">=":
                a_ub.append(-row)
                b_ub.append(-rhs)
            else:
                a_eq.append(row)
                b_eq.append(rhs)
        ref = linprog(
            c,
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=b_ub or None,
            A_eq=np.array(a_eq) if a_eq else None,
            b_eq=b_eq or None,
            bounds=list(zip(lower, upper)),
            method="highs",
        )
        ref_status = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
        assert res.status == ref_status, f"trial {trial}"
        if res.status == "optimal":
            assert res.value == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)


def test_solution_feasible_within_tolerance():
    rng = np.random.default_rng(5)
    for trial in range(50):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(1, 12))
        c = rng.normal(size=n)
        a = rng.normal(size=(k, n))
        b = rng.normal(size=k)
        senses = [str(s) for s in rng.choice(["<=", ">="], size=k)]
        res = solve_lp(lp_problem(c, a, senses, b, [-1.0] * n, [1.0] * n))
        if res.status != "optimal":
            continue
        x = np.asarray(res.x)
        assert np.all(x >= -1 - 1e-8) and np.all(x <= 1 + 1e-8)
        lhs = a @ x
        for i, s in enumerate(senses):
            if s == "<=":
                assert lhs[i] <= b[i] + 1e-7
            else:
                assert lhs[i] >= b[i] - 1e-7


def test_dimension_validation():
    with pytest.raises(ValueError):
        lp_problem([1.0, 2.0], [[1.0]], ["<="], [1.0], [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        lp_problem([1.0], [[1.0]], ["<"], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        lp_problem([1.0], [[1.0]], ["<="], [1.0], [2.0], [1.0])
