"""Dense linear programming with explicit variable bounds.

A two-phase primal simplex over the bounded-variable equality form, with
Bland's anti-cycling rule everywhere a choice is made, so runs are
deterministic.  Rows are equilibrated before solving.  Instances here are
tiny (at most a few dozen active constraints once callers do constraint
generation), so each iteration re-solves the basis system directly instead
of maintaining a factorization; that also keeps basic values drift-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tolerances import LP_TOL

_AT_LOWER = 0
_AT_UPPER = 1
_FREE_ZERO = 2
_BASIC = 3


@dataclass(frozen=True)
class LpProblem:
    """min (or max) c @ x  s.t.  A x {<=,>=,=} b,  lower <= x <= upper."""

    c: tuple[float, ...]
    a: tuple[tuple[float, ...], ...]
    senses: tuple[str, ...]
    b: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    maximize: bool = False

    def __post_init__(self) -> None:
        n = len(self.c)
        k = len(self.b)
        if len(self.senses) != k or len(self.a) != k:
            raise ValueError("constraint dimensions disagree")
        if any(len(row) != n for row in self.a):
            raise ValueError("constraint row length != number of variables")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound dimensions disagree")
        if any(s not in ("<=", ">=", "=") for s in self.senses):
            raise ValueError("senses must be '<=', '>=' or '='")
        if any(lo > up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("inconsistent bounds (lower > upper)")


@dataclass(frozen=True)
class LpResult:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    x: Optional[tuple[float, ...]]
    value: Optional[float]


def lp_problem(c, a, senses, b, lower, upper, maximize=False) -> LpProblem:
    """Convenience constructor from array-likes."""
    n = len(c)
    rows = np.asarray(a, dtype=float).reshape(len(b), n) if len(b) else np.zeros((0, n))
    return LpProblem(
        tuple(float(v) for v in c),
        tuple(tuple(float(v) for v in row) for row in rows),
        tuple(senses),
        tuple(float(v) for v in b),
        tuple(float(v) for v in lower),
        tuple(float(v) for v in upper),
        maximize,
    )


def solve_lp(problem: LpProblem, tol: float = LP_TOL, debug: bool = False) -> LpResult:
    """Solve, reporting infeasible and unbounded problems distinctly.

    With debug=True the two phases print their working state (basis, basic
    values, objective) to stderr after every pivot.
    """
    c = np.asarray(problem.c, dtype=float)
    if problem.maximize:
        c = -c
    lower = np.asarray(problem.lower, dtype=float)
    upper = np.asarray(problem.upper, dtype=float)
    n = c.size
    k = len(problem.b)

    if k == 0:
        return _solve_box_only(c, lower, upper, problem.maximize, tol)

    a = np.asarray(problem.a, dtype=float).reshape(k, n)
    b = np.asarray(problem.b, dtype=float).copy()

    # Row equilibration keeps pivot tolerances meaningful across instances
    # whose natural scales differ by many orders of magnitude.
    scale = np.maximum(np.abs(a).max(axis=1, initial=0.0), 1e-300)
    a = a / scale[:, None]
    b = b / scale

    # Equality form: one slack per inequality row, then one artificial per row.
    n_slack = sum(1 for s in problem.senses if s != "=")
    ncol = n + n_slack + k
    big_a = np.zeros((k, ncol))
    big_a[:, :n] = a
    lo = np.concatenate([lower, np.zeros(n_slack), np.zeros(k)])
    up = np.concatenate([upper, np.zeros(n_slack), np.zeros(k)])
    j = n
    for i, s in enumerate(problem.senses):
        if s == "<=":
            big_a[i, j] = 1.0
            lo[j], up[j] = 0.0, np.inf
            j += 1
        elif s == ">=":
            big_a[i, j] = 1.0
            lo[j], up[j] = -np.inf, 0.0
            j += 1

    state = np.full(ncol, _AT_LOWER, dtype=int)
    x = np.zeros(ncol)
    for jj in range(n + n_slack):
        if np.isfinite(lo[jj]):
            state[jj], x[jj] = _AT_LOWER, lo[jj]
        elif np.isfinite(up[jj]):
            state[jj], x[jj] = _AT_UPPER, up[jj]
        else:
            state[jj], x[jj] = _FREE_ZERO, 0.0

    resid = b - big_a[:, : n + n_slack] @ x[: n + n_slack]
    art = np.arange(n + n_slack, ncol)
    for i, jj in enumerate(art):
        big_a[i, jj] = 1.0 if resid[i] >= 0 else -1.0
        lo[jj], up[jj] = 0.0, np.inf
        state[jj] = _BASIC
    basis = list(int(v) for v in art)

    # Phase 1: minimize total artificial mass.
    c1 = np.zeros(ncol)
    c1[art] = 1.0
    status, x = _simplex(big_a, b, c1, lo, up, state, basis, tol, debug, "phase1")
    if status != "optimal" or float(x[art].sum()) > 10 * tol:
        return LpResult("infeasible", None, None)

    # Pin artificials; any still basic at zero just pins a redundant row.
    up[art] = 0.0

    c2 = np.zeros(ncol)
    c2[:n] = c
    status, x = _simplex(big_a, b, c2, lo, up, state, basis, tol, debug, "phase2")
    if status == "unbounded":
        return LpResult("unbounded", None, None)
    xs = x[:n]
    value = float(c @ xs)
    if problem.maximize:
        value = -value
    return LpResult("optimal", tuple(float(v) for v in xs), value)


def _solve_box_only(c, lower, upper, maximize, tol) -> LpResult:
    x = np.zeros_like(c)
    for j in range(c.size):
        if c[j] > tol:
            if not np.isfinite(lower[j]):
                return LpResult("unbounded", None, None)
            x[j] = lower[j]
        elif c[j] < -tol:
            if not np.isfinite(upper[j]):
                return LpResult("unbounded", None, None)
            x[j] = upper[j]
        else:
            if np.isfinite(lower[j]):
                x[j] = lower[j]
            elif np.isfinite(upper[j]):
                x[j] = min(upper[j], 0.0)
            else:
                x[j] = 0.0
    value = float(c @ x)
    if maximize:
        value = -value
    return LpResult("optimal", tuple(float(v) for v in x), value)


def _simplex(a, b, c, lo, up, state, basis, tol, debug=False, tag=""):
    """Bounded-variable primal simplex.

    Mutates state/basis in place and returns (status, x) with basic values
    recomputed from the final basis, so rounding never accumulates.
    """
    k, ncol = a.shape
    x = np.zeros(ncol)
    max_iters = 2000 + 200 * ncol
    for it in range(max_iters):
        nonbasic = np.flatnonzero(state != _BASIC)
        for jj in nonbasic:
            x[jj] = lo[jj] if state[jj] == _AT_LOWER else (up[jj] if state[jj] == _AT_UPPER else 0.0)
        bmat = a[:, basis]
        x_b = np.linalg.solve(bmat, b - a[:, nonbasic] @ x[nonbasic])
        x[basis] = x_b

        y = np.linalg.solve(bmat.T, c[basis])
        rc = c - y @ a
        if debug:
            import sys

            print(
                f"[lp:{tag}] iter {it}: basis={basis} obj={float(c @ x):.6g} "
                f"x_b={np.array2string(x_b, precision=4)}",
                file=sys.stderr,
            )

        entering, direction = -1, 0.0
        for jj in nonbasic:
            if up[jj] - lo[jj] <= tol:
                continue          # fixed variables never enter
            if state[jj] == _AT_LOWER and rc[jj] < -tol:
                entering, direction = int(jj), 1.0
                break
            if state[jj] == _AT_UPPER and rc[jj] > tol:
                entering, direction = int(jj), -1.0
                break
            if state[jj] == _FREE_ZERO and abs(rc[jj]) > tol:
                entering, direction = int(jj), (1.0 if rc[jj] < 0 else -1.0)
                break
        if entering < 0:
            return "optimal", x

        d = np.linalg.solve(bmat, a[:, entering])

        # Ratio test: smallest step at which a basic variable hits a bound.
        t_block, blocker = np.inf, -1
        for i in range(k):
            delta = direction * d[i]
            if delta > tol:
                if not np.isfinite(lo[basis[i]]):
                    continue
                t = (x[basis[i]] - lo[basis[i]]) / delta
            elif delta < -tol:
                if not np.isfinite(up[basis[i]]):
                    continue
                t = (up[basis[i]] - x[basis[i]]) / (-delta)
            else:
                continue
            t = max(t, 0.0)
            if t < t_block - 1e-12:
                t_block, blocker = t, i
            elif t <= t_block + 1e-12 and blocker >= 0 and basis[i] < basis[blocker]:
                blocker = i
        t_flip = up[entering] - lo[entering]
        if not np.isfinite(t_flip):
            t_flip = np.inf

        if not np.isfinite(t_block) and not np.isfinite(t_flip):
            return "unbounded", x

        if t_flip < t_block:
            state[entering] = _AT_UPPER if direction > 0 else _AT_LOWER
        else:
            leaving = basis[blocker]
            delta = direction * d[blocker]
            state[leaving] = _AT_LOWER if delta > 0 else _AT_UPPER
            basis[blocker] = entering
            state[entering] = _BASIC
    raise RuntimeError("simplex iteration limit exceeded")
