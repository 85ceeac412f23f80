"""Command-line front end.

Three subcommands:

    run      one solve of a (possibly low-rank-lifted) built-in problem,
             printing a one-line summary and optionally writing the trace CSV
    bench    execute a suite described by a flat key = value config file
    profile  recompute a data-profile curve from an emitted np_table CSV

Exit codes: 0 on success, 2 for configuration/usage errors, 3 for numeric or
subproblem-solver failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    ConfigError,
    ProblemSpec,
    SolverSpec,
    build_problem,
    parse_suite_config,
    run_suite,
    solver_config,
    write_profile,
    write_trace,
)
from .driver import SolverConfig, run
from .model import RegMode
from .rng import derive_seed
from .sketch import parse_ensemble
from .subproblem import NumericError, SolverFailure


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-arc",
        description="Cubic regularization in random subspaces: ARC, R-ARC, R-ARC-D.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one problem and print a summary")
    p_run.add_argument("--problem", required=True, help="built-in problem name")
    p_run.add_argument("--dim", type=int, required=True, help="ambient dimension d")
    p_run.add_argument("--lowrank", type=int, default=None,
                       help="lift a base problem of this dimension into R^d")
    p_run.add_argument("--rotation", choices=("axis", "haar"), default="haar")
    p_run.add_argument("--solver", choices=("arc", "rarc", "rarcd"), required=True)
    p_run.add_argument("--ensemble", default="gaussian",
                       choices=("gaussian", "sampling", "haar", "hashing", "identity"))
    p_run.add_argument("--hashing-s", type=int, default=1, help="nonzeros per hashing column")
    p_run.add_argument("--l", type=int, default=None, help="sketch dimension (rarc)")
    p_run.add_argument("--l0", type=int, default=None, help="initial sketch dimension (rarcd)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--second-order", type=float, default=None, metavar="EPS_H",
                       help="also require lambda_min(S H S^T) >= -EPS_H to stop")
    p_run.add_argument("--gtol", type=float, default=1e-5)
    p_run.add_argument("--max-iter", type=int, default=2000)
    p_run.add_argument("--reg-mode", choices=("reduced", "subspace"), default="reduced")
    p_run.add_argument("--out", type=Path, default=None, help="write the trace CSV here")

    p_bench = sub.add_parser("bench", help="run a benchmark suite from a config file")
    p_bench.add_argument("--config", type=Path, required=True)
    p_bench.add_argument("--out-dir", type=Path, required=True)

    p_prof = sub.add_parser("profile", help="data profile from an np_table CSV")
    p_prof.add_argument("--np-table", type=Path, required=True)
    p_prof.add_argument("--tau", type=float, required=True)
    p_prof.add_argument("--solver", default=None, help="solver label (needed if several)")
    p_prof.add_argument("--out", type=Path, required=True)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    spec = ProblemSpec(
        name=args.problem, dim=args.dim, lowrank=args.lowrank, rotation=args.rotation
    )
    problem = build_problem(spec, derive_seed(args.seed, 1))

    if args.solver == "arc" and args.ensemble not in ("gaussian", "identity"):
        raise ConfigError("arc is the full-space method; it admits only the identity sketch")
    ensemble = parse_ensemble("identity" if args.solver == "arc" else args.ensemble,
                              args.hashing_s)
    base = SolverConfig(
        ensemble=ensemble,
        reg_mode=RegMode(args.reg_mode),
        gtol=args.gtol,
        eps_H=args.second_order,
        max_iter=args.max_iter,
    )
    solver = SolverSpec(mode=args.solver, l=args.l, l0=args.l0)
    cfg = solver_config(base, solver, args.seed)

    record = run(problem, cfg)
    if args.out is not None:
        write_trace(record, args.out)
    last = record.rows[-1]
    print(
        f"{problem.name} d={problem.dim} solver={solver.label}: {record.status.value} "
        f"after {record.iterations} iterations, f={last.f:.6g}, "
        f"|S grad f|={last.sketched_grad_norm:.3g}, budget={last.cum_rel_hess:.4g}"
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    suite = parse_suite_config(text)
    emitted = run_suite(suite, args.out_dir)
    n = sum(len(v) for v in emitted.values())
    print(f"wrote {n} CSV files to {args.out_dir}")
    return 0


def _cmd_profile(args: argparse.Namespace) -> int:
    from .bench import profile_from_np_table

    points = profile_from_np_table(args.np_table, args.tau, args.solver)
    write_profile(points, args.out)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_profile(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverFailure, NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
