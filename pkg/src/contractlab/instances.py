"""Core domain types for contract-design instances.

Two interchangeable representations are supported: the finite table form
(actions with costs and outcome pmfs) and the complementary-CDF form (one
piecewise-linear monotone concave function per outcome threshold, admitting
a continuum of actions).  Validation covers the normalization rules, the
null action, and the FOSD / CDFP assumptions; the distance metrics used by
the learning analysis live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .piecewise import PiecewiseLinearFn, from_breakpoints
from .tolerances import ABS_TOL


@dataclass(frozen=True)
class OutcomeSpace:
    """Sorted outcome values, normalized to [0, 1]."""

    values: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Action:
    cost: float
    pmf: tuple[float, ...]


@dataclass(frozen=True)
class FiniteInstance:
    """Table form: a finite action set with explicit outcome pmfs."""

    outcomes: OutcomeSpace
    actions: tuple[Action, ...]

    @property
    def m(self) -> int:
        return self.outcomes.m

    @property
    def n(self) -> int:
        return len(self.actions)

    def costs(self) -> np.ndarray:
        return np.array([a.cost for a in self.actions], dtype=float)

    def pmf_matrix(self) -> np.ndarray:
        """Shape (n, m)."""
        return np.array([a.pmf for a in self.actions], dtype=float)

    def ccdf_matrix(self) -> np.ndarray:
        """Shape (n, m); row a is F(omega | a) = sum_{w >= omega} f(w | a)."""
        return ccdf_from_pmf(self.pmf_matrix())

    def expected_values(self) -> np.ndarray:
        return self.pmf_matrix() @ self.outcomes.as_array()


@dataclass(frozen=True)
class CcdfInstance:
    """Complementary-CDF form: F(omega | c) for omega = 1..m-1 as functions
    of cost on [0, 1], flat beyond cost_max.  Index omega-1 in ``ccdf``."""

    outcomes: OutcomeSpace
    ccdf: tuple[PiecewiseLinearFn, ...]
    cost_max: float

    @property
    def m(self) -> int:
        return self.outcomes.m

    def ccdf_at(self, cost) -> np.ndarray:
        """CCDF vector(s) for omega = 1..m-1 at scalar or array costs."""
        cost = np.asarray(cost, dtype=float)
        out = np.stack([fn.eval(cost) for fn in self.ccdf], axis=-1)
        return out

    def pmf_at(self, cost: float) -> np.ndarray:
        """Outcome pmf induced by the CCDF vector at one cost."""
        return pmf_from_ccdf_tail(self.ccdf_at(float(cost)))

    def breakpoint_costs(self) -> np.ndarray:
        """Union of breakpoint costs across all CCDFs, plus 0 and cost_max."""
        pts = {0.0, float(self.cost_max)}
        for fn in self.ccdf:
            pts.update(float(x) for x in fn.xs)
        return np.array(sorted(pts))


@dataclass(frozen=True)
class Contract:
    """Nonnegative payment per outcome (limited liability)."""

    payments: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.payments)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.payments, dtype=float)

    def is_bounded_by(self, h: float, tol: float = ABS_TOL) -> bool:
        p = self.as_array()
        return bool(np.all(p >= -tol) and np.all(p <= h + tol))


def null_contract(m: int) -> Contract:
    return Contract((0.0,) * m)


@dataclass(frozen=True)
class Distribution:
    """Outcome pmf with its complementary-CDF view."""

    pmf: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.pmf)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.pmf, dtype=float)

    def ccdf(self) -> np.ndarray:
        """F(omega) = sum_{w >= omega} f(w); F(0) = 1 for a proper pmf."""
        return ccdf_from_pmf(self.as_array())


def ccdf_from_pmf(pmf: np.ndarray) -> np.ndarray:
    """Reverse cumulative sums along the last axis."""
    rev = np.flip(np.asarray(pmf, dtype=float), axis=-1)
    return np.flip(np.cumsum(rev, axis=-1), axis=-1)


def pmf_from_ccdf_tail(tail: np.ndarray) -> np.ndarray:
    """Pmf from the CCDF values at omega = 1..m-1 (F(0) = 1 implied)."""
    tail = np.asarray(tail, dtype=float)
    full = np.concatenate([[1.0], tail, [0.0]])
    return full[:-1] - full[1:]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate_finite(instance: FiniteInstance) -> ValidationReport:
    """Report every invariant violation of the table form.

    Violations are data, not failures: an unsorted value vector, a pmf that
    does not sum to one, a missing null action, and so on all come back with
    the offending index.
    """
    out: list[Violation] = []
    v = instance.outcomes.as_array()
    if instance.m < 2:
        out.append(Violation("outcome count", "outcomes", f"m={instance.m} < 2"))
    if np.any(np.diff(v) < -ABS_TOL):
        idx = int(np.argmax(np.diff(v) < -ABS_TOL))
        out.append(Violation("values order", f"value {idx + 1}", "not ascending"))
    if v.size and (v[0] < -ABS_TOL or v[-1] > 1 + ABS_TOL):
        out.append(Violation("values range", "values", "outside [0, 1]"))

    has_null = False
    for i, a in enumerate(instance.actions):
        p = np.asarray(a.pmf, dtype=float)
        if p.size != instance.m:
            out.append(Violation("pmf length", f"action {i}", f"{p.size} != m={instance.m}"))
            continue
        if np.any(p < -ABS_TOL):
            out.append(Violation("pmf sign", f"action {i}", "negative probability"))
        if abs(float(p.sum()) - 1.0) > ABS_TOL:
            out.append(Violation("pmf sum", f"action {i}", f"sums to {p.sum():.12g}"))
        if a.cost < -ABS_TOL or a.cost > 1 + ABS_TOL:
            out.append(Violation("cost range", f"action {i}", f"cost {a.cost} outside [0, 1]"))
        if abs(a.cost) <= ABS_TOL and abs(p[0] - 1.0) <= ABS_TOL:
            has_null = True
    if not has_null:
        out.append(Violation("null action", "actions", "no zero-cost point mass at outcome 0"))
    return ValidationReport(tuple(out))


def check_fosd(instance: FiniteInstance) -> tuple[bool, Optional[tuple[int, int]]]:
    """First-order stochastic dominance across the action set.

    True iff whenever c_a >= c_a', the CCDF of a dominates that of a'
    pointwise (within ABS_TOL).  Returns the first violating (a, a') pair,
    with costs sorted so that a is the costlier action.
    """
    order = np.argsort(instance.costs(), kind="stable")
    costs = instance.costs()[order]
    ccdf = instance.ccdf_matrix()[order]
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            # cost_j >= cost_i, so action j must dominate action i; equal
            # costs force equal distributions (dominance both ways).
            if np.any(ccdf[j] < ccdf[i] - ABS_TOL):
                return False, (int(order[j]), int(order[i]))
            if costs[j] - costs[i] <= ABS_TOL and np.any(ccdf[i] < ccdf[j] - ABS_TOL):
                return False, (int(order[i]), int(order[j]))
    return True, None


def check_cdfp(instance: FiniteInstance) -> tuple[bool, Optional[tuple[int, tuple[float, float, float]]]]:
    """Concavity of the distribution function property.

    For each outcome threshold, the points (c_a, F(omega | c_a)) must lie on
    their own upper concave hull; equivalently the chord slopes along
    cost-sorted distinct actions are nonincreasing.  Returns the first
    violating (omega, cost triple).
    """
    order = np.argsort(instance.costs(), kind="stable")
    costs = instance.costs()[order]
    ccdf = instance.ccdf_matrix()[order]
    keep = np.concatenate([[True], np.diff(costs) > ABS_TOL])
    costs = costs[keep]
    ccdf = ccdf[keep]
    for omega in range(1, instance.m):
        f = ccdf[:, omega]
        for k in range(1, len(costs) - 1):
            s_prev = (f[k] - f[k - 1]) / (costs[k] - costs[k - 1])
            s_next = (f[k + 1] - f[k]) / (costs[k + 1] - costs[k])
            if s_next > s_prev + ABS_TOL:
                triple = (float(costs[k - 1]), float(costs[k]), float(costs[k + 1]))
                return False, (omega, triple)
    return True, None


def to_ccdf_instance(instance: FiniteInstance) -> CcdfInstance:
    """Piecewise-linear CCDF form of a table instance.

    Interpolates the CCDF points per outcome threshold and extends them flat
    beyond the maximum cost; evaluating the result at any action cost
    reproduces the table values exactly.  Requires FOSD and CDFP, since the
    interpolation would otherwise misrepresent the instance.
    """
    ok, pair = check_fosd(instance)
    if not ok:
        raise ValueError(f"FOSD violated by action pair {pair}")
    ok, witness = check_cdfp(instance)
    if not ok:
        raise ValueError(f"CDFP violated at {witness}")
    order = np.argsort(instance.costs(), kind="stable")
    costs = instance.costs()[order]
    ccdf = instance.ccdf_matrix()[order]
    keep = np.concatenate([[True], np.diff(costs) > ABS_TOL])
    costs = costs[keep]
    ccdf = ccdf[keep]
    cost_max = float(costs[-1]) if costs[-1] > ABS_TOL else 1.0
    fns = []
    for omega in range(1, instance.m):
        pts = [(float(c), float(f)) for c, f in zip(costs, ccdf[:, omega])]
        if pts[0][0] > 0:
            pts.insert(0, (0.0, pts[0][1]))
        if pts[-1][0] < 1.0:
            pts.append((1.0, pts[-1][1]))
        fns.append(from_breakpoints(pts))
    return CcdfInstance(instance.outcomes, tuple(fns), cost_max)


def validate_ccdf(instance: CcdfInstance) -> ValidationReport:
    """Invariant report for the CCDF form (plumbing for loaders/generators)."""
    out: list[Violation] = []
    if len(instance.ccdf) != instance.m - 1:
        out.append(Violation("ccdf count", "ccdf", f"{len(instance.ccdf)} != m-1"))
        return ValidationReport(tuple(out))
    if not (ABS_TOL < instance.cost_max <= 1 + ABS_TOL):
        out.append(Violation("cost_max", "cost_max", f"{instance.cost_max} outside (0, 1]"))
    for i, fn in enumerate(instance.ccdf, start=1):
        lo, hi = fn.domain
        if abs(lo) > ABS_TOL or hi < 1 - ABS_TOL:
            out.append(Violation("domain", f"F({i}|.)", f"domain [{lo}, {hi}] != [0, 1]"))
            continue
        if abs(fn.eval(0.0)) > ABS_TOL:
            out.append(Violation("null anchor", f"F({i}|.)", f"F({i}|0) = {fn.eval(0.0):.3g} != 0"))
        if not fn.is_nondecreasing():
            out.append(Violation("FOSD", f"F({i}|.)", "not nondecreasing in cost"))
        if not fn.is_concave():
            out.append(Violation("CDFP", f"F({i}|.)", "not concave in cost"))
        if np.any(np.asarray(fn.ys) > 1 + ABS_TOL) or np.any(np.asarray(fn.ys) < -ABS_TOL):
            out.append(Violation("range", f"F({i}|.)", "values outside [0, 1]"))
        if instance.cost_max < 1 - ABS_TOL:
            if abs(fn.eval(1.0) - fn.eval(instance.cost_max)) > ABS_TOL:
                out.append(Violation("flat extension", f"F({i}|.)", "not constant beyond cost_max"))
    for i in range(1, len(instance.ccdf)):
        a, b = instance.ccdf[i - 1], instance.ccdf[i]
        grid = sorted(set(a.xs) | set(b.xs))
        av, bv = a.eval(np.array(grid)), b.eval(np.array(grid))
        if np.any(bv > av + ABS_TOL):
            k = int(np.argmax(bv > av + ABS_TOL))
            out.append(Violation("nesting", f"F({i + 1}|.)", f"exceeds F({i}|.) at cost {grid[k]:.6g}"))
    return ValidationReport(tuple(out))


def dedupe_equal_actions(actions: Sequence[Action]) -> tuple[Action, ...]:
    """Drop actions with equal cost and equal distribution (ingestion rule).

    Equal cost with different distributions is left alone: that is an FOSD
    violation to report, not to merge silently.
    """
    kept: list[Action] = []
    for a in actions:
        dup = False
        for b in kept:
            if abs(a.cost - b.cost) <= ABS_TOL and np.allclose(a.pmf, b.pmf, atol=ABS_TOL):
                dup = True
                break
        if not dup:
            kept.append(a)
    return tuple(kept)


# ---------------------------------------------------------------------------
# Distances and empirical distributions
# ---------------------------------------------------------------------------


def tv_distance(d: Distribution, d2: Distribution) -> float:
    """Total variation distance: half the L1 distance between pmfs."""
    if d.m != d2.m:
        raise ValueError(f"support size mismatch: {d.m} != {d2.m}")
    return float(0.5 * np.abs(d.as_array() - d2.as_array()).sum())


def kol_distance(d: Distribution, d2: Distribution) -> float:
    """Kolmogorov distance: max gap between complementary CDFs."""
    if d.m != d2.m:
        raise ValueError(f"support size mismatch: {d.m} != {d2.m}")
    return float(np.abs(d.ccdf() - d2.ccdf()).max())


def empirical_distribution(samples: Sequence[int], m: int) -> Distribution:
    """Uniform distribution over observed outcome indices."""
    arr = np.asarray(samples, dtype=int)
    if arr.size == 0:
        raise ValueError("empty sample set")
    if np.any(arr < 0) or np.any(arr >= m):
        raise ValueError("sample outcome index out of range")
    counts = np.bincount(arr, minlength=m).astype(float)
    return Distribution(tuple(counts / arr.size))
