"""Command-line interface.

Subcommands: ``bounds`` prints the closed-form stepsizes, floors, and
budgets for a (problem, noise) pair; ``run`` executes an ad-hoc seeded
experiment and writes trial plus aggregate CSVs; ``fig1``, ``fig2`` and
``fig3`` run the canned protocols; ``estimate`` runs the parameter
estimators and prints their reports.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime abort
(a cell whose trials all aborted, or an unexpected failure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import ConfigError, NoiseModel, NoisyOracle, RngStream, ESTIMATOR_TAG
from .estimation import (
    estimate_grad_var,
    estimate_L1_saa,
    estimate_sigma_additive,
    estimate_sigma_relative,
)
from .figures import _rsgf_estimates, fig1, fig2, fig3
from .harness import (
    ExperimentConfig,
    run_experiment,
    write_aggregate_csv,
    write_trial_csv,
)
from .problems import PROBLEM_FACTORIES
from .solvers import SOLVER_KINDS, SolverConfig
from .theory import additive_bounds, multiplicative_bounds

__all__ = ["main", "cli_main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _csv_names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _build_parser() -> _Parser:
    parser = _Parser(prog="starsopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_problem(p):
        p.add_argument("--problem", choices=sorted(PROBLEM_FACTORIES), default="f1")
        p.add_argument("--n", type=int, default=8)
        p.add_argument("--noise", choices=("add", "mult"), default="add")

    p_bounds = sub.add_parser("bounds", help="print theoretical stepsizes and floors")
    common_problem(p_bounds)
    p_bounds.add_argument("--sigma", type=float, required=True)
    p_bounds.add_argument(
        "--M",
        type=float,
        default=None,
        help="historical |f| bound for the multiplicative floor "
        "(default: max(|f(x0)|, |f*|))",
    )

    p_run = sub.add_parser("run", help="run a seeded experiment and write CSVs")
    common_problem(p_run)
    p_run.add_argument("--sigma", type=_csv_floats, required=True,
                       help="comma-separated noise levels")
    p_run.add_argument("--solver", type=_csv_names, required=True,
                       help=f"comma-separated subset of {','.join(SOLVER_KINDS)}")
    p_run.add_argument("--seeds", type=int, default=20)
    p_run.add_argument("--seed0", type=int, default=0)
    group = p_run.add_mutually_exclusive_group(required=True)
    group.add_argument("--budget", type=int, help="evaluation budget per trial")
    group.add_argument("--iters", type=int, help="iteration limit per trial")
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--stride", type=int, default=1, help="record stride")

    for name, extra in (("fig1", 2000), ("fig2", None), ("fig3", 10_000)):
        p_fig = sub.add_parser(name, help=f"run the {name} protocol")
        p_fig.add_argument("--out", type=Path, required=True)
        p_fig.add_argument("--seeds", type=int, default=15 if name == "fig2" else 20)
        p_fig.add_argument("--seed0", type=int, default=0)
        if extra is not None:
            p_fig.add_argument("--budget", type=int, default=extra)

    p_est = sub.add_parser("estimate", help="run the parameter estimators")
    common_problem(p_est)
    p_est.add_argument("--sigma", type=float, required=True)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--m", type=int, default=10_000, help="replicates for sigma")
    p_est.add_argument("--samples", type=int, default=200, help="replicates per Hessian probe")
    p_est.add_argument("--fd-step", type=float, default=1e-2)
    p_est.add_argument("--mu", type=float, default=0.0025)
    return parser


def _cmd_bounds(args) -> int:
    problem = PROBLEM_FACTORIES[args.problem](args.n)
    if args.noise == "add":
        bounds = additive_bounds(args.sigma, problem.L1, problem.n, problem.R2)
    else:
        m_bound = args.M
        if m_bound is None:
            m_bound = max(abs(problem.eval(problem.x0)), abs(problem.f_star))
        bounds = multiplicative_bounds(
            args.sigma, problem.L0, problem.L1, problem.n, problem.R2, m_bound
        )
    print(f"problem        {args.problem} (n={problem.n})")
    print(f"noise          {bounds.noise_kind} sigma={args.sigma:g}")
    if bounds.mu_star is not None:
        print(f"mu_star        {bounds.mu_star:.6e}")
    if bounds.c4 is not None:
        print(f"c4             {bounds.c4:.6e}")
    print(f"h              {bounds.h:.6e}")
    print(f"eps_pred       {bounds.eps_pred:.6e}")
    print(f"N              {bounds.N}")
    for key in sorted(bounds.constants):
        print(f"{key:<14} {bounds.constants[key]:.6e}")
    print(bounds.as_record())
    return 0


def _cmd_run(args) -> int:
    bad = [s for s in args.solver if s not in SOLVER_KINDS]
    if bad:
        raise ConfigError(f"unknown solver(s): {', '.join(bad)}")
    solvers = []
    for idx, kind in enumerate(args.solver):
        if kind == "rsgf":
            # rsgf needs estimated constants; estimate per noise level is
            # cell-specific, so use the first sigma for the shared config
            l1_est, sigma_est = _rsgf_estimates(
                args.noise, args.sigma[0], idx, args.seed0, args.n
            )
            solvers.append(SolverConfig("rsgf", L1_est=l1_est, sigma_est=sigma_est))
        else:
            solvers.append(SolverConfig(kind))
    config = ExperimentConfig(
        problem=args.problem,
        n=args.n,
        noise_kind=args.noise,
        sigmas=tuple(args.sigma),
        solvers=tuple(solvers),
        seeds=args.seeds,
        seed0=args.seed0,
        eval_budget=args.budget,
        iteration_limit=args.iters,
        record_stride=args.stride,
    )
    results = run_experiment(config)
    exit_code = 0
    for (solver, sigma), cell in results.items():
        cell_dir = args.out / f"{solver}_{sigma:.0e}"
        write_aggregate_csv(cell.aggregate, cell_dir / "agg.csv")
        for i, trajectory in enumerate(cell.trajectories):
            write_trial_csv(trajectory, cell_dir / f"trial{i:03d}.csv")
        if cell.aborted_trials:
            print(
                f"warning: {solver} sigma={sigma:g}: "
                f"{cell.aborted_trials}/{config.seeds} trials aborted",
                file=sys.stderr,
            )
        if cell.aggregate is None:
            exit_code = 2
    print(f"wrote results under {args.out}")
    return exit_code


def _cmd_estimate(args) -> int:
    problem = PROBLEM_FACTORIES[args.problem](args.n)
    noise = NoiseModel(args.noise, args.sigma)
    oracle = NoisyOracle(problem, noise, RngStream(args.seed, 0).derive(1))
    if args.noise == "add":
        report = estimate_sigma_additive(oracle, problem.x0, args.m)
        print(f"sigma_additive   value={report.value:.6e} "
              f"m={report.sample_count} se={report.dispersion:.2e}")
    else:
        at = problem.x_star if abs(problem.f_star) > 0 else problem.x0
        report = estimate_sigma_relative(oracle, at, args.m)
        print(f"sigma_relative   value={report.value:.6e} "
              f"m={report.sample_count} se={report.dispersion:.2e}")
    l1 = estimate_L1_saa(oracle, problem.x0, samples=args.samples, fd_step=args.fd_step)
    print(f"L1_saa           value={l1.value:.6e} "
          f"evals={l1.sample_count} last_change={l1.dispersion:.2e}")
    box_rng = RngStream(args.seed, 0).derive(ESTIMATOR_TAG)
    points = [
        problem.x0 + box_rng.generator.uniform(-1.0, 1.0, size=problem.n)
        for _ in range(5)
    ]
    grad = estimate_grad_var(oracle, points, mu=args.mu, m=max(2, args.m // 100))
    print(f"grad_var_max     value={grad.value:.6e} "
          f"m={grad.sample_count} se~{grad.dispersion:.2e}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "fig1":
            fig1(args.out, seeds=args.seeds, budget=args.budget, seed0=args.seed0)
            print(f"wrote fig1 artifacts under {args.out}")
            return 0
        if args.command == "fig2":
            rows = fig2(args.out, seeds=args.seeds, seed0=args.seed0)
            for r in rows:
                print(
                    f"{r.kind} sigma={r.sigma:.0e} n={r.n}: "
                    f"eps_actual={r.eps_actual:.3e} eps_pred={r.eps_pred:.3e}"
                )
            print(f"wrote fig2 artifacts under {args.out}")
            return 0
        if args.command == "fig3":
            fig3(args.out, seeds=args.seeds, budget=args.budget, seed0=args.seed0)
            print(f"wrote fig3 artifacts under {args.out}")
            return 0
        if args.command == "estimate":
            return _cmd_estimate(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime abort
        print(f"abort: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
