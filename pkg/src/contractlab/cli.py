"""Command-line harness: validate, solve, lin, learn, hardness.

Every command's output is a pure function of its flags and seeds; CSV files
start with a versioned schema line and rows are sorted by seed, so repeated
invocations are byte-identical.  The CONTRACTLAB_OUT environment variable
sets the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .agent import principal_utility
from .fileio import InstanceFormatError, load_instance, parse_instance, save_instance
from .hardness import (
    HardnessParams,
    gen_additive_hardness,
    gen_multiplicative_hardness,
    gen_random_finite,
    verify_gap,
    verify_mixed_approx,
)
from .instances import FiniteInstance, check_cdfp, check_fosd, validate_ccdf, validate_finite
from .learners import LearnerConfig, learn_action_query, learn_contract_query
from .optimize import (
    optimal_bounded_contract,
    optimal_bounded_contract_ccdf,
    optimal_general_contract,
    optimal_linear_contract,
)
from .oracles import ACTION_QUERY, CONTRACT_QUERY, OracleSession, derive_seed


def _out_dir(override: Optional[str]) -> Path:
    base = override or os.environ.get("CONTRACTLAB_OUT", ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, schema: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: contractlab.{schema}.v1\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        instance = parse_instance(Path(args.path).read_text(), insert_null=args.insert_null)
    except (InstanceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = validate_finite(instance) if isinstance(instance, FiniteInstance) else validate_ccdf(instance)
    if isinstance(instance, FiniteInstance) and report.ok:
        fosd, pair = check_fosd(instance)
        cdfp, witness = check_cdfp(instance)
        print(f"valid finite instance: m={instance.m}, n={instance.n}")
        print(f"FOSD: {'yes' if fosd else f'no (actions {pair})'}")
        print(f"CDFP: {'yes' if cdfp else f'no at {witness}'}" if fosd else "CDFP: skipped (needs FOSD)")
        return 0
    if report.ok:
        print(f"valid ccdf instance: m={instance.m}, cost_max={instance.cost_max}")
        return 0
    print(str(report))
    return 1


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.path, insert_null=args.insert_null)
    if isinstance(instance, FiniteInstance):
        result = optimal_general_contract(instance) if args.general else optimal_bounded_contract(instance, args.bound)
    else:
        result = optimal_bounded_contract_ccdf(instance, args.bound)
    kind = "general" if args.general else f"H={args.bound}"
    print(f"optimal {kind} contract: utility {result.principal_utility!r}")
    print(f"incentivized action: {result.incentivized_action}")
    print("payments: " + " ".join(repr(p) for p in result.contract.payments))
    if args.out:
        path = _out_dir(args.out_dir) / args.out
        _write_csv(
            path, "solve", ["h", "utility", "incentivized_action", *[f"p{i}" for i in range(instance.m)]],
            [[_fmt("inf" if args.general else args.bound), _fmt(result.principal_utility),
              result.incentivized_action, *[_fmt(p) for p in result.contract.payments]]],
        )
        print(f"wrote {path}")
    return 0


def cmd_lin(args: argparse.Namespace) -> int:
    instance = load_instance(args.path, insert_null=args.insert_null)
    if not isinstance(instance, FiniteInstance):
        print("error: linear-contract optimization needs a finite instance", file=sys.stderr)
        return 2
    rho, lin = optimal_linear_contract(instance)
    print(f"rho: {rho!r}")
    print(f"LIN: {lin!r}")
    return 0


def _parse_seeds(args: argparse.Namespace) -> list[int]:
    if args.seeds:
        return [int(s) for s in args.seeds.split(",") if s != ""]
    return [derive_seed(args.seed_base, f"trial{i}") for i in range(args.num_seeds)]


def cmd_learn(args: argparse.Namespace) -> int:
    instance = load_instance(args.path, insert_null=args.insert_null)
    if args.mode == "action" and not isinstance(instance, FiniteInstance):
        print("error: action-query learning needs a finite instance", file=sys.stderr)
        return 2
    if args.mode == "contract":
        if isinstance(instance, FiniteInstance):
            fosd, pair = check_fosd(instance)
            if not fosd:
                print(f"error: FOSD violated at action pair {pair}", file=sys.stderr)
                return 2
            cdfp, witness = check_cdfp(instance)
            if not cdfp:
                print(f"error: CDFP violated at {witness}", file=sys.stderr)
                return 2
        else:
            report = validate_ccdf(instance)
            if not report.ok:
                print(f"error: {report}", file=sys.stderr)
                return 2

    if isinstance(instance, FiniteInstance):
        opt_h_truth = optimal_bounded_contract(instance, args.bound).principal_utility
    else:
        opt_h_truth = optimal_bounded_contract_ccdf(instance, args.bound).principal_utility

    rows = []
    for seed in sorted(_parse_seeds(args)):
        config = LearnerConfig(
            eps=args.eps, delta=args.delta, h=args.bound,
            sample_constant_c=args.sample_constant,
            max_refinement_iterations=args.max_iterations,
            rng_seed=seed,
            init_concave_eps=args.init_concave_eps,
            init_oracle_eps=args.init_oracle_eps,
            init_oracle_delta=args.init_oracle_delta,
            simplify_tol=args.simplify_tol,
        )
        if args.mode == "action":
            session = OracleSession(instance, ACTION_QUERY, seed)
            report = learn_action_query(session, [a.cost for a in instance.actions], config)
        else:
            session = OracleSession(instance, CONTRACT_QUERY, seed)
            report = learn_contract_query(session, config)
        true_utility = principal_utility(instance, report.contract)
        rows.append([
            seed, _fmt(args.eps), _fmt(args.bound), report.query_count, report.iterations,
            _fmt(report.estimated_utility), _fmt(true_utility), _fmt(opt_h_truth),
            int(report.bound_exceeded),
        ])
        print(
            f"seed {seed}: queries={report.query_count} iters={report.iterations} "
            f"true_utility={true_utility!r} opt_h={opt_h_truth!r}"
        )
    if args.out:
        path = _out_dir(args.out_dir) / args.out
        _write_csv(
            path, "learn",
            ["seed", "eps", "h", "queries", "iterations", "est_utility", "true_utility", "opt_h_truth", "bound_exceeded"],
            rows,
        )
        print(f"wrote {path}")
    return 0


def cmd_hardness(args: argparse.Namespace) -> int:
    out = _out_dir(args.out_dir)
    if args.which == "add":
        instance = gen_additive_hardness(HardnessParams(args.eps, args.bound))
        save_instance(instance, out / "additive_hardness.json")
        rep = verify_gap(instance, args.bound)
        _write_csv(
            out / "additive_gap.csv", "gap",
            ["eps", "h", "opt", "opt_h", "ratio", "gap", "opt_source"],
            [[_fmt(args.eps), _fmt(args.bound), _fmt(rep.opt), _fmt(rep.opt_h), _fmt(rep.ratio), _fmt(rep.gap), rep.opt_source]],
        )
        print(f"additive hardness: OPT={rep.opt!r} OPT_H={rep.opt_h!r} gap={rep.gap!r}")
        print(f"wrote {out / 'additive_hardness.json'}, {out / 'additive_gap.csv'}")
        return 0
    if args.which == "mult":
        gen = gen_multiplicative_hardness(HardnessParams(args.eps, args.bound, args.grid))
        save_instance(gen.finite, out / "multiplicative_hardness_finite.json")
        save_instance(gen.ccdf, out / "multiplicative_hardness_ccdf.json")
        rep = verify_gap(gen.finite, args.bound, gen.optimal_contract)
        _write_csv(
            out / "multiplicative_gap.csv", "gap",
            ["eps", "h", "opt", "opt_h", "ratio", "gap", "opt_source"],
            [[_fmt(args.eps), _fmt(args.bound), _fmt(rep.opt), _fmt(rep.opt_h), _fmt(rep.ratio), _fmt(rep.gap), rep.opt_source]],
        )
        print(f"multiplicative hardness: OPT={rep.opt!r} OPT_H={rep.opt_h!r} ratio={rep.ratio!r}")
        print(f"wrote {out / 'multiplicative_hardness_finite.json'}, {out / 'multiplicative_hardness_ccdf.json'}, {out / 'multiplicative_gap.csv'}")
        return 0

    # mixed: the approximation inequality over random instances + both families
    eps_grid = [float(e) for e in args.eps_grid.split(",")]
    rows = []
    violations = 0
    for i in range(args.trials):
        instance = gen_random_finite(args.outcomes, args.actions, derive_seed(args.seed_base, f"mixed{i}"))
        for row in verify_mixed_approx(instance, eps_grid):
            rows.append([f"random{i}", _fmt(row.eps), row.source, _fmt(row.opt), _fmt(row.lin), _fmt(row.bound), int(row.holds)])
            violations += not row.holds
    for name, instance in (
        ("additive", gen_additive_hardness(HardnessParams(args.eps, args.bound))),
        ("multiplicative", gen_multiplicative_hardness(HardnessParams(args.eps, args.bound, args.grid)).finite),
    ):
        for row in verify_mixed_approx(instance, eps_grid):
            rows.append([name, _fmt(row.eps), row.source, _fmt(row.opt), _fmt(row.lin), _fmt(row.bound), int(row.holds)])
            violations += not row.holds
    path = out / "mixed_approximation.csv"
    _write_csv(path, "mixed", ["instance", "eps", "source", "opt", "lin", "bound", "holds"], rows)
    print(f"checked {len(rows)} rows, violations: {violations}")
    print(f"wrote {path}")
    return 0 if violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contractlab",
        description="Solve, simulate, and learn bounded principal-agent contracts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--insert-null", action="store_true", help="insert the null action if the file lacks it")
        p.add_argument("--out-dir", default=None, help="output directory (default: $CONTRACTLAB_OUT or .)")

    p = sub.add_parser("validate", help="validate an instance file")
    p.add_argument("path")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="optimal (H-bounded) contract")
    p.add_argument("path")
    p.add_argument("--H", dest="bound", type=float, default=1.0)
    p.add_argument("--general", action="store_true", help="compute the unbounded optimum (H = 1/eta)")
    p.add_argument("--out", default=None, help="also write a one-row CSV")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lin", help="optimal linear contract")
    p.add_argument("path")
    add_common(p)
    p.set_defaults(func=cmd_lin)

    p = sub.add_parser("learn", help="run a learning experiment")
    p.add_argument("path")
    p.add_argument("--mode", choices=["action", "contract"], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--H", dest="bound", type=float, default=1.0)
    p.add_argument("--seeds", default=None, help="comma-separated explicit seeds")
    p.add_argument("--num-seeds", type=int, default=10)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--C", dest="sample_constant", type=float, default=1.0)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--init-concave-eps", type=float, default=None)
    p.add_argument("--init-oracle-eps", type=float, default=None)
    p.add_argument("--init-oracle-delta", type=float, default=None)
    p.add_argument("--simplify-tol", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV of per-seed learner reports")
    add_common(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("hardness", help="generate hardness instances and gap reports")
    p.add_argument("which", choices=["mult", "add", "mixed"])
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--H", dest="bound", type=float, default=1.0)
    p.add_argument("--n", dest="grid", type=int, default=200, help="discretization points (mult)")
    p.add_argument("--trials", type=int, default=100, help="random instances (mixed)")
    p.add_argument("--eps-grid", default="0.125,0.03125", help="eps values to check (mixed)")
    p.add_argument("--m", dest="outcomes", type=int, default=4, help="outcomes per random instance (mixed)")
    p.add_argument("--n-actions", dest="actions", type=int, default=6, help="actions per random instance (mixed)")
    p.add_argument("--seed-base", type=int, default=0)
    add_common(p)
    p.set_defaults(func=cmd_hardness)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
