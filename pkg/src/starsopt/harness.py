"""Seeded multi-trial experiment runner, statistics, and file writers.

Trial i of an experiment runs on stream_id = i over the base seed, so
results are independent of solver ordering and of whether other cells run
at all. Trajectories within a (solver, sigma) cell are aligned on the
merged grid of their evaluation counts with last-value carry-forward,
which keeps the evaluation axis honest when per-iteration costs differ
(line-search probes vary). Quantiles interpolate linearly between order
statistics. CSV files are written with LF newlines and shortest
round-trip decimal formatting, so write-then-parse reproduces every value
bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import NoiseModel, SolverAbortError
from .problems import PROBLEM_FACTORIES, ProblemSpec
from .solvers import SolverConfig, Trajectory, run

__all__ = [
    "ExperimentConfig",
    "AggregateSeries",
    "CellResult",
    "run_experiment",
    "aggregate",
    "mean_final_accuracy",
    "write_trial_csv",
    "write_aggregate_csv",
    "read_csv",
    "emit_plot_script",
]

TRIAL_HEADER = "k,nevals,f_true,acc"
AGGREGATE_HEADER = "nevals,mean,median,q25,q75,min,max"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n: int
    noise_kind: str
    sigmas: tuple[float, ...]
    solvers: tuple[SolverConfig, ...]
    seeds: int
    seed0: int = 0
    eval_budget: int | None = None
    iteration_limit: int | None = None
    record_stride: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        object.__setattr__(self, "sigmas", tuple(self.sigmas))
        object.__setattr__(self, "solvers", tuple(self.solvers))

    def make_problem(self) -> ProblemSpec:
        try:
            factory = PROBLEM_FACTORIES[self.problem]
        except KeyError:
            raise ValueError(f"unknown problem {self.problem!r}") from None
        return factory(self.n)


@dataclass
class AggregateSeries:
    """Across-trial accuracy statistics on a common evaluation grid."""

    nevals: np.ndarray
    mean: np.ndarray
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray
    min: np.ndarray
    max: np.ndarray

    def check_ordering(self) -> None:
        ok = (
            np.all(self.min <= self.q25 + 1e-15 * np.abs(self.q25))
            and np.all(self.q25 <= self.median)
            and np.all(self.median <= self.q75)
            and np.all(self.q75 <= self.max + 1e-15 * np.abs(self.max))
        )
        if not ok:
            raise AssertionError("quantile ordering violated")


@dataclass
class CellResult:
    solver: str
    sigma: float
    trajectories: list[Trajectory]
    aggregate: "AggregateSeries | None"
    aborted_trials: int = 0


def aggregate(trials: list[Trajectory]) -> AggregateSeries:
    """Align trials by evaluation count (last value carried forward) and
    reduce accuracy across them."""
    if not trials:
        raise ValueError("aggregate needs at least one trajectory")
    grid = np.unique(np.concatenate([t.nevals for t in trials]))
    rows = np.empty((len(trials), len(grid)))
    for row, t in enumerate(trials):
        idx = np.searchsorted(t.nevals, grid, side="right") - 1
        idx = np.clip(idx, 0, len(t.nevals) - 1)
        rows[row] = t.acc[idx]
    # sort each column so every statistic (including the mean's summation
    # order) is independent of trial ordering, bitwise
    rows = np.sort(rows, axis=0)
    series = AggregateSeries(
        nevals=grid,
        mean=rows.mean(axis=0),
        median=np.percentile(rows, 50, axis=0),
        q25=np.percentile(rows, 25, axis=0),
        q75=np.percentile(rows, 75, axis=0),
        min=rows[0],
        max=rows[-1],
    )
    series.check_ordering()
    return series


def mean_final_accuracy(trials: list[Trajectory], N: int) -> float:
    """Arithmetic mean of f(x_N) - f* across trials."""
    finals = []
    for t in trials:
        hits = np.nonzero(t.k == N)[0]
        if len(hits) == 0:
            raise ValueError(f"a trial has no record at iteration {N}")
        finals.append(float(t.acc[hits[0]]))
    return float(np.mean(finals))


def run_experiment(config: ExperimentConfig) -> dict[tuple[str, float], CellResult]:
    """Run every (solver, sigma) cell over all seeds.

    Aborted trials keep their partial trajectories but are excluded from
    the aggregate, which is computed over completed trials (None if none
    completed).
    """
    problem = config.make_problem()
    results: dict[tuple[str, float], CellResult] = {}
    for solver_cfg in config.solvers:
        for sigma in config.sigmas:
            noise = NoiseModel(config.noise_kind, sigma)
            cfg = replace(
                solver_cfg,
                eval_budget=(
                    config.eval_budget
                    if solver_cfg.eval_budget is None
                    else solver_cfg.eval_budget
                ),
                iteration_limit=(
                    config.iteration_limit
                    if solver_cfg.iteration_limit is None
                    else solver_cfg.iteration_limit
                ),
            )
            trajectories: list[Trajectory] = []
            completed: list[Trajectory] = []
            aborted = 0
            for trial in range(config.seeds):
                try:
                    t = run(
                        cfg,
                        problem,
                        noise,
                        config.seed0,
                        stream_id=trial,
                        record_stride=config.record_stride,
                    )
                    completed.append(t)
                except SolverAbortError as exc:
                    aborted += 1
                    t = exc.trajectory
                trajectories.append(t)
            agg = aggregate(completed) if completed else None
            results[(solver_cfg.kind, sigma)] = CellResult(
                solver=solver_cfg.kind,
                sigma=sigma,
                trajectories=trajectories,
                aggregate=agg,
                aborted_trials=aborted,
            )
    return results


def write_trial_csv(trajectory: Trajectory | None, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(TRIAL_HEADER + "\n")
        if trajectory is None:
            return
        for k, nevals, f_true, acc in zip(
            trajectory.k, trajectory.nevals, trajectory.f_true, trajectory.acc
        ):
            fh.write(f"{int(k)},{int(nevals)},{_fmt(f_true)},{_fmt(acc)}\n")


def write_aggregate_csv(series: AggregateSeries | None, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(AGGREGATE_HEADER + "\n")
        if series is None:
            return
        series.check_ordering()
        for i in range(len(series.nevals)):
            row = [
                str(int(series.nevals[i])),
                _fmt(series.mean[i]),
                _fmt(series.median[i]),
                _fmt(series.q25[i]),
                _fmt(series.q75[i]),
                _fmt(series.min[i]),
                _fmt(series.max[i]),
            ]
            fh.write(",".join(row) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    """Parse a harness CSV back into named float columns."""
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        return {name: np.array([]) for name in header}
    data = np.array([[float(v) for v in row] for row in rows])
    return {name: data[:, i] for i, name in enumerate(header)}


_PLOT_PREAMBLE = '''\
#!/usr/bin/env python3
"""Render experiment CSVs (auto-generated; needs numpy and matplotlib).

Run from its own directory: python {name}
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

os.chdir(os.path.dirname(os.path.abspath(__file__)))


def load(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.atleast_1d(data)
'''


def emit_plot_script(panels, path, title: str, kind: str = "trajectory") -> None:
    """Write a self-contained matplotlib script for a panel grid.

    ``panels`` is a list of (panel_title, [(label, csv_relpath), ...]).
    Trajectory panels draw the median accuracy per curve with a min/max
    band and quartile error bars on a log accuracy axis; summary panels
    (kind="summary") draw accuracy-versus-dimension series from columns
    named in the label as ``column:yscale``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_PLOT_PREAMBLE.format(name=path.name)]
    ncols = min(2, len(panels))
    nrows = (len(panels) + ncols - 1) // ncols
    lines.append(
        f"fig, axes = plt.subplots({nrows}, {ncols}, "
        f"figsize=({6.0 * ncols}, {4.2 * nrows}), squeeze=False)"
    )
    for idx, (panel_title, curves) in enumerate(panels):
        r, c = divmod(idx, ncols)
        lines.append(f"ax = axes[{r}][{c}]")
        for label, rel in curves:
            lines.append(f"d = load({rel!r})")
            if kind == "trajectory":
                lines.append("if d.size and d['nevals'].size:")
                lines.append(
                    f"    ax.plot(d['nevals'], np.maximum(d['median'], 1e-300), label={label!r})"
                )
                lines.append(
                    "    ax.fill_between(d['nevals'], np.maximum(d['min'], 1e-300), "
                    "np.maximum(d['max'], 1e-300), alpha=0.15)"
                )
                lines.append(
                    "    ax.plot(d['nevals'], np.maximum(d['q25'], 1e-300), ls=':', lw=0.8)"
                )
                lines.append(
                    "    ax.plot(d['nevals'], np.maximum(d['q75'], 1e-300), ls=':', lw=0.8)"
                )
            else:
                column, marker = label.split(":")
                lines.append(
                    f"ax.plot(d['n'], d[{column!r}], {marker!r}, label={column!r})"
                )
        lines.append("ax.set_yscale('log')")
        if kind == "trajectory":
            lines.append("ax.set_xlabel('function evaluations')")
            lines.append("ax.set_ylabel('true accuracy f(x_k) - f*')")
        else:
            lines.append("ax.set_xlabel('dimension n')")
            lines.append("ax.set_ylabel('absolute accuracy')")
        lines.append(f"ax.set_title({panel_title!r})")
        lines.append("ax.legend(fontsize=8)")
    for idx in range(len(panels), nrows * ncols):
        r, c = divmod(idx, ncols)
        lines.append(f"axes[{r}][{c}].axis('off')")
    out_png = path.with_suffix(".png").name
    lines.append(f"fig.suptitle({title!r})")
    lines.append("fig.tight_layout()")
    lines.append(f"fig.savefig({out_png!r}, dpi=150)")
    lines.append(f"print('wrote', {out_png!r})")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
