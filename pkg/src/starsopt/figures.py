"""The three canned experiment protocols behind the fig1/fig2/fig3 commands.

Each protocol writes aggregate CSVs plus a self-contained plot script and
returns the in-memory results so callers (tests, notebooks) can assert on
them without re-parsing files. All outputs are deterministic functions of
the flags; file writes happen after all trials complete, in (noise kind,
sigma, solver) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ESTIMATOR_TAG, NoiseModel, RngStream, NoisyOracle
from .estimation import estimate_grad_var, estimate_L1_saa
from .harness import (
    CellResult,
    ExperimentConfig,
    emit_plot_script,
    mean_final_accuracy,
    run_experiment,
    write_aggregate_csv,
)
from .problems import PROBLEM_FACTORIES
from .solvers import SolverConfig
from .theory import (
    eps_pred_additive,
    eps_pred_multiplicative,
    iteration_budget_additive,
    snr_bound_uniform,
)

__all__ = ["fig1", "fig2", "fig3", "Fig2Row"]

FIG1_SIGMAS = (1e-6, 1e-3)
FIG2_ADD_SIGMAS = (1e-2, 1e-4)
FIG2_MULT_SIGMAS = (1e-4, 1e-6)
FIG2_DIMS = (8, 16, 32)
FIG3_SIGMAS = (1e-5, 1e-3, 1e-1)
FIG3_SOLVERS = ("stars", "rg", "ss", "rsgf", "rp", "es")
FIG3_PLOTTED = ("stars", "ss", "rsgf", "rp", "es")

# Stream ids reserved for pre-run parameter estimation so they can never
# collide with trial streams (trial i uses stream_id = i).
_ESTIMATION_STREAM_BASE = 1_000_000


def _sig_label(sigma: float) -> str:
    return f"{sigma:.0e}"


def _cell_dir(kind: str, sigma: float) -> str:
    return f"{kind}_{_sig_label(sigma)}"


def fig1(out_dir, seeds: int = 20, budget: int = 2000, seed0: int = 0):
    """Noise-invariance study: stars vs rg on the chained quadratic, n=8,
    both noise kinds at sigma 1e-6 and 1e-3."""
    out = Path(out_dir)
    results: dict[tuple[str, float, str], CellResult] = {}
    panels = []
    for kind in ("add", "mult"):
        for sigma in FIG1_SIGMAS:
            config = ExperimentConfig(
                problem="f1",
                n=8,
                noise_kind=kind,
                sigmas=(sigma,),
                solvers=(SolverConfig("stars"), SolverConfig("rg")),
                seeds=seeds,
                seed0=seed0,
                eval_budget=budget,
            )
            cell = run_experiment(config)
            curves = []
            for solver in ("stars", "rg"):
                res = cell[(solver, sigma)]
                results[(kind, sigma, solver)] = res
                rel = f"{_cell_dir(kind, sigma)}/{solver}.csv"
                write_aggregate_csv(res.aggregate, out / rel)
                curves.append((solver, rel))
            panels.append((f"{kind} noise, sigma={_sig_label(sigma)}", curves))
    emit_plot_script(panels, out / "plot_fig1.py", "accuracy vs evaluations (n=8)")
    return results


@dataclass
class Fig2Row:
    kind: str
    sigma: float
    n: int
    iters: int
    eps_pred: float
    eps_actual: float

    @property
    def ratio(self) -> float:
        return self.eps_actual / self.eps_pred


def fig2(out_dir, seeds: int = 15, seed0: int = 0, kinds=("add", "mult")):
    """Accuracy-versus-dimension study for stars.

    Additive cells run for the theoretical budget N sized at the accuracy
    floor; multiplicative cells (no closed-form budget) are evaluation-
    matched to the additive cell in the same column. The multiplicative
    floor uses the post-hoc historical mean M of |f(x_k)| from the runs
    themselves.
    """
    out = Path(out_dir)
    rows: list[Fig2Row] = []
    for kind in kinds:
        sigmas = FIG2_ADD_SIGMAS if kind == "add" else FIG2_MULT_SIGMAS
        for pos, sigma in enumerate(sigmas):
            for n in FIG2_DIMS:
                problem = PROBLEM_FACTORIES["f1"](n)
                eps_add = eps_pred_additive(
                    sigma if kind == "add" else FIG2_ADD_SIGMAS[pos], n
                )
                n_add = iteration_budget_additive(n, problem.L1, problem.R2, eps_add)
                iters = n_add if kind == "add" else (2 * n_add) // 3
                config = ExperimentConfig(
                    problem="f1",
                    n=n,
                    noise_kind=kind,
                    sigmas=(sigma,),
                    solvers=(SolverConfig("stars"),),
                    seeds=seeds,
                    seed0=seed0,
                    iteration_limit=iters,
                    record_stride=max(1, iters // 200),
                )
                cell = run_experiment(config)[("stars", sigma)]
                eps_actual = mean_final_accuracy(cell.trajectories, iters)
                if kind == "add":
                    eps_pred = eps_add
                else:
                    m_hist = float(
                        np.mean([t.mean_abs_f for t in cell.trajectories])
                    )
                    eps_pred = eps_pred_multiplicative(
                        sigma, n, snr_bound_uniform(sigma), m_hist,
                        problem.L0, problem.L1,
                    )
                rows.append(Fig2Row(kind, sigma, n, iters, eps_pred, eps_actual))

    panels = []
    for kind in kinds:
        sigmas = FIG2_ADD_SIGMAS if kind == "add" else FIG2_MULT_SIGMAS
        for sigma in sigmas:
            cell_rows = [r for r in rows if r.kind == kind and r.sigma == sigma]
            rel = f"{_cell_dir(kind, sigma)}.csv"
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="\n") as fh:
                fh.write("n,iters,eps_pred,eps_actual,ratio\n")
                for r in cell_rows:
                    fh.write(
                        f"{r.n},{r.iters},{r.eps_pred!r},{r.eps_actual!r},{r.ratio!r}\n"
                    )
            panels.append(
                (
                    f"{kind} noise, sigma={_sig_label(sigma)}",
                    [("eps_pred:x--", rel), ("eps_actual:o-", rel)],
                )
            )
    emit_plot_script(panels, out / "plot_fig2.py", "accuracy vs dimension", kind="summary")
    return rows


def _rsgf_estimates(kind: str, sigma: float, cell_index: int, seed0: int, n: int):
    """Estimate the gradient Lipschitz constant and the stochastic-gradient
    variance for rsgf, on streams disjoint from every trial stream."""
    problem = PROBLEM_FACTORIES["f1"](n)
    noise = NoiseModel(kind, sigma)
    stream = RngStream(seed0, _ESTIMATION_STREAM_BASE + cell_index)
    oracle = NoisyOracle(problem, noise, stream.derive(1))
    l1 = estimate_L1_saa(oracle, problem.x0, samples=200, fd_step=1e-2)
    # probe points uniform in a box of half-width 1 around the start point
    box_rng = stream.derive(ESTIMATOR_TAG)
    points = [
        problem.x0 + box_rng.generator.uniform(-1.0, 1.0, size=n) for _ in range(5)
    ]
    grad_var = estimate_grad_var(oracle, points, mu=0.0025, m=100)
    return max(l1.value, 1e-8), max(math.sqrt(grad_var.value), 1e-8)


def fig3(out_dir, seeds: int = 20, budget: int = 10_000, seed0: int = 0,
         sigmas=FIG3_SIGMAS):
    """Solver comparison on the chained quadratic, n=8: all six solvers per
    noise cell, evaluation-matched budgets. rsgf runs on estimated
    constants; the per-cell scripts plot the five comparison curves."""
    out = Path(out_dir)
    n = 8
    results: dict[tuple[str, float, str], CellResult] = {}
    all_panels = []
    cell_index = 0
    for kind in ("add", "mult"):
        for sigma in sigmas:
            l1_est, sigma_est = _rsgf_estimates(kind, sigma, cell_index, seed0, n)
            cell_index += 1
            solvers = (
                SolverConfig("stars"),
                SolverConfig("rg"),
                SolverConfig("ss"),
                SolverConfig("rsgf", L1_est=l1_est, sigma_est=sigma_est),
                SolverConfig("rp"),
                SolverConfig("es"),
            )
            config = ExperimentConfig(
                problem="f1",
                n=n,
                noise_kind=kind,
                sigmas=(sigma,),
                solvers=solvers,
                seeds=seeds,
                seed0=seed0,
                eval_budget=budget,
            )
            cell = run_experiment(config)
            curves = []
            for solver in FIG3_SOLVERS:
                res = cell[(solver, sigma)]
                results[(kind, sigma, solver)] = res
                rel = f"{_cell_dir(kind, sigma)}/{solver}.csv"
                write_aggregate_csv(res.aggregate, out / rel)
                if solver in FIG3_PLOTTED:
                    curves.append((solver, f"{solver}.csv"))
            emit_plot_script(
                [(f"{kind} noise, sigma={_sig_label(sigma)}", curves)],
                out / _cell_dir(kind, sigma) / "plot.py",
                f"solver comparison, {kind} sigma={_sig_label(sigma)}",
            )
            all_panels.append(
                (
                    f"{kind} noise, sigma={_sig_label(sigma)}",
                    [
                        (s, f"{_cell_dir(kind, sigma)}/{s}.csv")
                        for s in FIG3_PLOTTED
                    ],
                )
            )
    emit_plot_script(all_panels, out / "plot_fig3.py", "solver comparison (n=8)")
    return results
