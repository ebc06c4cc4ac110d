"""Six zero-order solvers behind a single step-driven interface.

Solver kinds:
  * ``stars``: random search with a noise-adjusted smoothing stepsize
    (fixed optimum under additive noise, dynamic C4 sqrt(|f~|) under
    multiplicative noise) and a cached re-evaluation at each new iterate.
  * ``rg``: the same update with a smoothing stepsize derived from a target
    accuracy epsilon instead of the noise level; both points fresh.
  * ``ss``: fixed stepsizes sized from L0, R and the horizon N.
  * ``rsgf``: fixed smoothing stepsize 0.0025 with a step length derived
    from estimated constants.
  * ``rp``: golden-section line search along a random direction.
  * ``es``: (1+1) evolution strategy with multiplicative stepsize
    adaptation.

Every noisy evaluation draws fresh noise; reuse of a past evaluation (the
cached value in ``stars``) is realized by the solver caching the returned
number, never by the oracle caching noise. Per-step evaluation costs:
stars 2 (additive) / 3 (multiplicative), rg/ss/rsgf/es 2, rp = number of
line-search probes. ``stars`` spends one extra evaluation up front.

``run`` drives any solver to its iteration limit or evaluation budget and
logs true accuracy through the noise-free probe. For the solvers above
(except ``rp``) on the built-in problems it dispatches to compiled kernels
that replay the exact same arithmetic and random draws; see ``_kernels``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import (
    DIRECTION_TAG,
    NOISE_TAG,
    ConfigError,
    NoiseKind,
    NoiseModel,
    NoisyOracle,
    RngStream,
    SolverAbortError,
)
from .problems import ProblemSpec
from .theory import c4 as c4_coefficient
from .theory import mu_star_additive, mu_tilde, step_length

__all__ = [
    "SOLVER_KINDS",
    "SolverConfig",
    "Trajectory",
    "rg_mu",
    "ss_stepsizes",
    "rsgf_gamma",
    "run",
]

SOLVER_KINDS = ("stars", "rg", "ss", "rsgf", "rp", "es")

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

# Evolution-strategy stepsize multipliers: expansion on success, contraction
# on failure, tuned for a 0.27 target success rate.
ES_SUCCESS_FACTOR = 1.3956
ES_FAILURE_FACTOR = 0.8840


@dataclass
class SolverConfig:
    """Per-solver parameters. Fields left as None are resolved at run time
    from the problem metadata and noise model (see ``resolve``)."""

    kind: str
    iteration_limit: int | None = None
    eval_budget: int | None = None
    # stars
    L1: float | None = None
    sigma: float | None = None
    mu_min: float = 1e-12
    # rg / ss target accuracy
    epsilon: float | None = None
    # ss
    L0: float | None = None
    R2: float | None = None
    N: int | None = None
    # rsgf
    L1_est: float | None = None
    sigma_est: float | None = None
    f0: float | None = None
    mu: float = 0.0025
    # rp
    line_search_accuracy: float = 0.0025
    line_search_span: float = 10.0
    # es
    sigma0: float = 1.0
    p: float = 0.27
    c_s: float = ES_SUCCESS_FACTOR
    c_f: float = ES_FAILURE_FACTOR

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ConfigError(f"unknown solver kind {self.kind!r}")

    def resolve(self, problem: ProblemSpec, noise: NoiseModel) -> "SolverConfig":
        """Fill unset fields from problem metadata and the noise model."""
        updates: dict = {}
        if self.iteration_limit is None and self.eval_budget is None:
            raise ConfigError("one of iteration_limit / eval_budget must be set")
        if self.L1 is None:
            updates["L1"] = problem.L1
        if self.sigma is None:
            updates["sigma"] = noise.sigma
        if self.epsilon is None:
            updates["epsilon"] = 0.1 if self.kind == "ss" else 2.0 ** -16
        if self.L0 is None:
            updates["L0"] = problem.L0
        if self.R2 is None:
            updates["R2"] = problem.R2
        if self.L1_est is None:
            updates["L1_est"] = problem.L1
        if self.f0 is None:
            updates["f0"] = problem.eval(problem.x0)
        return replace(self, **updates) if updates else self


@dataclass
class Trajectory:
    """Per-iteration accuracy record against cumulative noisy evaluations.

    ``acc`` is the true value f(x_k) - f*, read through the noise-free
    probe. ``mean_abs_f`` is the running mean of |f(x_k)| over every
    iterate (including the start point), used post hoc as the historical
    bound M in the relative-noise floor.
    """

    k: np.ndarray
    nevals: np.ndarray
    f_true: np.ndarray
    acc: np.ndarray
    f_star: float
    mean_abs_f: float
    aborted: bool = False
    abort_reason: str | None = None

    def __len__(self) -> int:
        return len(self.k)

    @property
    def records(self) -> list[tuple[int, int, float, float]]:
        return list(
            zip(self.k.tolist(), self.nevals.tolist(), self.f_true.tolist(), self.acc.tolist())
        )

    @property
    def final_acc(self) -> float:
        return float(self.acc[-1])


def rg_mu(epsilon: float, L1: float, n: int) -> float:
    """Accuracy-based smoothing stepsize mu = (5 / (3(n+4))) sqrt(eps / (2 L1))."""
    if epsilon <= 0 or L1 <= 0 or n < 1:
        raise ValueError("epsilon, L1 must be > 0 and n >= 1")
    return 5.0 / (3.0 * (n + 4)) * math.sqrt(epsilon / (2.0 * L1))


def ss_stepsizes(L0: float, R2: float, epsilon: float, N: int, n: int) -> tuple[float, float]:
    """Horizon-dependent stepsizes h = R / ((n+4) sqrt(N+1) L0) and
    mu = epsilon / (2 L0 sqrt(n))."""
    if min(L0, R2, epsilon) <= 0 or N < 0 or n < 1:
        raise ValueError("L0, R2, epsilon must be > 0, N >= 0, n >= 1")
    h = math.sqrt(R2) / ((n + 4) * math.sqrt(N + 1.0) * L0)
    mu = epsilon / (2.0 * L0 * math.sqrt(n))
    return h, mu


def rsgf_gamma(
    L1_est: float,
    sigma_est: float,
    f0: float,
    n: int,
    N: int,
    R2: float | None = None,
) -> float:
    """Step length gamma = min(1/(4 L1 sqrt(n+4)), D / (sigma sqrt(N))) / sqrt(n+4).

    D = sqrt(2 f0 / L1) is a diameter proxy from the start value. When f0
    is not positive the proxy degenerates, so f0 is replaced by R2*L1/2
    (making D = sqrt(R2)) when R2 is known and by L1/2 (D = 1) otherwise.
    """
    if L1_est <= 0 or sigma_est <= 0 or N < 1:
        raise ValueError("L1_est, sigma_est must be > 0 and N >= 1")
    if f0 <= 0:
        f0 = R2 * L1_est / 2.0 if R2 is not None else L1_est / 2.0
    d_tilde = math.sqrt(2.0 * f0 / L1_est)
    root = math.sqrt(n + 4.0)
    return min(1.0 / (4.0 * L1_est * root), d_tilde / (sigma_est * math.sqrt(N))) / root


def _golden_section(probe, lo: float, hi: float, tol: float, max_evals: float):
    """Golden-section minimization of a noisy 1-d function on [lo, hi].

    Shrinks the bracket until its width is <= tol, spending one probe per
    shrink after the two initial interior points. Returns
    (t, evals_used, exhausted); on probe exhaustion t is the best probed
    point so far instead of the bracket midpoint.
    """
    a, b = float(lo), float(hi)
    width = b - a
    if width <= tol:
        return 0.5 * (a + b), 0, False
    shrinks = math.ceil(math.log(tol / width) / math.log(_INV_PHI))
    if max_evals < 2:
        return 0.5 * (a + b), 0, True
    c = a + _INV_PHI2 * width
    d = a + _INV_PHI * width
    yc = probe(c)
    yd = probe(d)
    used = 2
    best_t, best_y = (c, yc) if yc <= yd else (d, yd)
    for _ in range(shrinks - 1):
        if used >= max_evals:
            return best_t, used, True
        if yc < yd:
            b, d, yd = d, c, yc
            width *= _INV_PHI
            c = a + _INV_PHI2 * width
            yc = probe(c)
            if yc < best_y:
                best_t, best_y = c, yc
        else:
            a, c, yc = c, d, yd
            width *= _INV_PHI
            d = a + _INV_PHI * width
            yd = probe(d)
            if yd < best_y:
                best_t, best_y = d, yd
        used += 1
    # one more logical shrink is free: keep the half certified by the
    # final comparison
    if yc < yd:
        return 0.5 * (a + d), used, False
    return 0.5 * (c + b), used, False


# ---------------------------------------------------------------------------
# Reference (pure Python) solver implementations.


class _BaseSolver:
    init_evals = 0
    step_cost: int | None = 2

    def __init__(self, problem: ProblemSpec, oracle: NoisyOracle, rng: RngStream):
        self.problem = problem
        self.oracle = oracle
        self.rng = rng
        self.x = problem.x0.copy()
        self.k = 0

    def _check_finite(self, s: float, x_new: np.ndarray) -> None:
        if not (math.isfinite(s) and np.all(np.isfinite(x_new))):
            raise SolverAbortError(
                f"{type(self).__name__}: non-finite update at iteration {self.k + 1}"
            )

    def step(self, max_evals: float = math.inf) -> None:
        raise NotImplementedError


class _StarsSolver(_BaseSolver):
    init_evals = 1

    def __init__(self, problem, oracle, rng, cfg: SolverConfig, noise: NoiseModel):
        super().__init__(problem, oracle, rng)
        if noise.kind is NoiseKind.ADDITIVE:
            if not cfg.sigma > 0:
                raise ConfigError("stars in additive mode requires sigma > 0")
            self.mu_fixed = mu_star_additive(cfg.sigma, cfg.L1, problem.n)
            self.c4_value = None
            self.step_cost = 2
        else:
            if not 0 < cfg.sigma < 3 ** -0.5:
                raise ConfigError(
                    "stars in multiplicative mode requires 0 < sigma < 3**-0.5"
                )
            self.mu_fixed = None
            self.c4_value = c4_coefficient(cfg.sigma, cfg.L1, problem.n)
            self.step_cost = 3
        self.mu_min = cfg.mu_min
        self.h = step_length(cfg.L1, problem.n)
        self.cached = oracle.evaluate(self.x)

    def step(self, max_evals: float = math.inf) -> None:
        u = self.rng.normals(self.problem.n)
        if self.c4_value is not None:
            f3 = self.oracle.evaluate(self.x)
            mu = mu_tilde(self.c4_value, f3, self.mu_min)
        else:
            mu = self.mu_fixed
        fplus = self.oracle.evaluate(self.x + mu * u)
        s = (fplus - self.cached) / mu
        x_new = self.x - (self.h * s) * u
        self._check_finite(s, x_new)
        self.cached = self.oracle.evaluate(x_new)
        self.x = x_new
        self.k += 1


class _FixedMuSolver(_BaseSolver):
    """Shared stepping for rg/ss/rsgf: fixed smoothing stepsize, both points
    evaluated fresh each iteration."""

    def __init__(self, problem, oracle, rng, gamma: float, mu: float):
        super().__init__(problem, oracle, rng)
        if not (gamma > 0 and mu > 0):
            raise ConfigError(f"stepsizes must be positive (gamma={gamma}, mu={mu})")
        self.gamma = gamma
        self.mu = mu

    def step(self, max_evals: float = math.inf) -> None:
        u = self.rng.normals(self.problem.n)
        f0 = self.oracle.evaluate(self.x)
        fplus = self.oracle.evaluate(self.x + self.mu * u)
        s = (fplus - f0) / self.mu
        x_new = self.x - (self.gamma * s) * u
        self._check_finite(s, x_new)
        self.x = x_new
        self.k += 1


class _RpSolver(_BaseSolver):
    step_cost = None  # probe count varies per step

    def __init__(self, problem, oracle, rng, cfg: SolverConfig):
        super().__init__(problem, oracle, rng)
        if not cfg.line_search_span > 0:
            raise ConfigError("line_search_span must be > 0")
        self.span = cfg.line_search_span
        self.tol = cfg.line_search_accuracy

    def step(self, max_evals: float = math.inf) -> None:
        u = self.rng.normals(self.problem.n)
        t, _, _ = _golden_section(
            lambda t: self.oracle.evaluate(self.x + t * u),
            -self.span,
            self.span,
            self.tol,
            max_evals,
        )
        x_new = self.x + t * u
        self._check_finite(t, x_new)
        self.x = x_new
        self.k += 1


class _EsSolver(_BaseSolver):
    def __init__(self, problem, oracle, rng, cfg: SolverConfig):
        super().__init__(problem, oracle, rng)
        if not cfg.sigma0 > 0:
            raise ConfigError("sigma0 must be > 0")
        self.sigma = cfg.sigma0
        self.c_s = cfg.c_s
        self.c_f = cfg.c_f

    def step(self, max_evals: float = math.inf) -> None:
        u = self.rng.normals(self.problem.n)
        f_parent = self.oracle.evaluate(self.x)
        child = self.x + self.sigma * u
        f_child = self.oracle.evaluate(child)
        if f_child <= f_parent:
            x_new, sigma_new = child, self.c_s * self.sigma
        else:
            x_new, sigma_new = self.x, self.c_f * self.sigma
        self._check_finite(sigma_new, x_new)
        self.x = x_new
        self.sigma = sigma_new
        self.k += 1


def _planned_steps(cfg: SolverConfig, init_evals: int, step_cost: int | None) -> float:
    limit = math.inf if cfg.iteration_limit is None else cfg.iteration_limit
    if cfg.eval_budget is not None and step_cost is not None:
        limit = min(limit, max(0, (cfg.eval_budget - init_evals) // step_cost))
    return limit


def _build_solver(problem, noise, cfg: SolverConfig, rng, oracle):
    kind = cfg.kind
    if kind == "stars":
        return _StarsSolver(problem, oracle, rng, cfg, noise)
    if kind == "rg":
        gamma = step_length(cfg.L1, problem.n)
        return _FixedMuSolver(problem, oracle, rng, gamma, rg_mu(cfg.epsilon, cfg.L1, problem.n))
    if kind == "ss":
        horizon = cfg.N if cfg.N is not None else _planned_steps(cfg, 0, 2)
        if not math.isfinite(horizon):
            raise ConfigError("ss needs a horizon: set N, iteration_limit or eval_budget")
        h, mu = ss_stepsizes(cfg.L0, cfg.R2, cfg.epsilon, int(horizon), problem.n)
        return _FixedMuSolver(problem, oracle, rng, h, mu)
    if kind == "rsgf":
        horizon = cfg.N if cfg.N is not None else _planned_steps(cfg, 0, 2)
        if not math.isfinite(horizon) or horizon < 1:
            raise ConfigError("rsgf needs a horizon: set N, iteration_limit or eval_budget")
        if cfg.sigma_est is None or not cfg.sigma_est > 0:
            raise ConfigError("rsgf requires sigma_est > 0 (see the estimation module)")
        gamma = rsgf_gamma(cfg.L1_est, cfg.sigma_est, cfg.f0, problem.n, int(horizon), cfg.R2)
        return _FixedMuSolver(problem, oracle, rng, gamma, cfg.mu)
    if kind == "rp":
        return _RpSolver(problem, oracle, rng, cfg)
    if kind == "es":
        return _EsSolver(problem, oracle, rng, cfg)
    raise ConfigError(f"unknown solver kind {kind!r}")


_INIT_EVALS = {"stars": 1, "rg": 0, "ss": 0, "rsgf": 0, "rp": 0, "es": 0}


def _step_cost(kind: str, noise: NoiseModel) -> int | None:
    if kind == "stars":
        return 3 if noise.kind is NoiseKind.MULTIPLICATIVE else 2
    if kind == "rp":
        return None
    return 2


class _TrajectoryBuilder:
    def __init__(self, problem: ProblemSpec):
        self.problem = problem
        f0 = problem.eval(problem.x0)
        self.ks = [0]
        self.nevals = [0]
        self.fs = [f0]
        self.sum_absf = abs(f0)
        self.steps = 0

    def add(self, k: int, nevals: int, f_true: float) -> None:
        self.ks.append(k)
        self.nevals.append(nevals)
        self.fs.append(f_true)

    def build(self, aborted=False, reason=None) -> Trajectory:
        f_true = np.array(self.fs, dtype=float)
        return Trajectory(
            k=np.array(self.ks, dtype=np.int64),
            nevals=np.array(self.nevals, dtype=np.int64),
            f_true=f_true,
            acc=f_true - self.problem.f_star,
            f_star=self.problem.f_star,
            mean_abs_f=self.sum_absf / (self.steps + 1),
            aborted=aborted,
            abort_reason=reason,
        )


def _run_reference(problem, noise, cfg, rng, oracle, record_stride):
    builder = _TrajectoryBuilder(problem)
    init_evals = _INIT_EVALS[cfg.kind]
    step_cost = _step_cost(cfg.kind, noise)
    min_step = step_cost if step_cost is not None else 2
    budget = cfg.eval_budget
    limit = math.inf if cfg.iteration_limit is None else cfg.iteration_limit
    if limit < 1 or (budget is not None and budget < init_evals + min_step):
        return builder.build()
    solver = _build_solver(problem, noise, cfg, rng, oracle)
    aborted = False
    reason = None
    evals_at_last_step = oracle.eval_count
    while solver.k < limit:
        remaining = math.inf if budget is None else budget - oracle.eval_count
        if remaining < min_step:
            break
        try:
            solver.step(max_evals=remaining)
        except SolverAbortError as exc:
            aborted = True
            reason = str(exc)
            break
        evals_at_last_step = oracle.eval_count
        builder.steps = solver.k
        f_true = problem.eval(solver.x)
        builder.sum_absf += abs(f_true)
        if solver.k % record_stride == 0:
            builder.add(solver.k, oracle.eval_count, f_true)
    if builder.ks[-1] != builder.steps:
        # an aborted step may have consumed evaluations after the last
        # completed iterate; the record reflects the iterate's own count
        builder.add(builder.steps, evals_at_last_step, problem.eval(solver.x))
    trajectory = builder.build(aborted, reason)
    if aborted:
        raise SolverAbortError(reason, trajectory)
    return trajectory


_CHUNK = 8192


def _run_kernel(problem, noise, cfg, rng, oracle, record_stride):
    pid = _kernels.problem_id(problem.name)
    kind = cfg.kind
    mult = noise.kind is NoiseKind.MULTIPLICATIVE
    init_evals = _INIT_EVALS[kind]
    step_cost = _step_cost(kind, noise)
    builder = _TrajectoryBuilder(problem)
    total = _planned_steps(cfg, init_evals, step_cost)
    if total < 1:
        return builder.build()
    total = int(total)

    # Derive stepping constants exactly as the reference solvers do;
    # constructing the solver also performs any init evaluation.
    solver = _build_solver(problem, noise, cfg, rng, oracle)
    x = solver.x
    if kind == "stars":
        cached = solver.cached
        mu_fixed = solver.mu_fixed if solver.mu_fixed is not None else 0.0
        c4_value = solver.c4_value if solver.c4_value is not None else 0.0
        args = (solver.h, mu_fixed, c4_value, solver.mu_min)
        abort_evals = _kernels.ABORT_EVALS["stars_mult" if mult else "stars_add"]
    elif kind == "es":
        sigma = solver.sigma
        args = (solver.c_s, solver.c_f)
        abort_evals = _kernels.ABORT_EVALS["es"]
    else:
        args = (solver.gamma, solver.mu)
        abort_evals = _kernels.ABORT_EVALS["fixed_mu"]

    noise_cols = step_cost
    dir_gen = rng.generator
    sum_absf = builder.sum_absf
    done = 0
    aborted = False
    rec_k = np.empty(_CHUNK, dtype=np.int64)
    rec_f = np.empty(_CHUNK, dtype=float)
    while done < total and not aborted:
        m = min(_CHUNK, total - done)
        U = dir_gen.standard_normal((m, problem.n))
        V = oracle.noise_block((m, noise_cols))
        if kind == "stars":
            cached, steps, sum_absf, nrec, aborted = _kernels.stars_chunk(
                pid, mult, x, cached, *args, U, V, sum_absf, done, record_stride,
                rec_k, rec_f,
            )
        elif kind == "es":
            sigma, steps, sum_absf, nrec, aborted = _kernels.es_chunk(
                pid, mult, x, sigma, *args, U, V, sum_absf, done, record_stride,
                rec_k, rec_f,
            )
        else:
            steps, sum_absf, nrec, aborted = _kernels.fixed_mu_chunk(
                pid, mult, x, *args, U, V, sum_absf, done, record_stride,
                rec_k, rec_f,
            )
        done += steps
        oracle.add_evals(steps * step_cost + (abort_evals if aborted else 0))
        for i in range(nrec):
            k = int(rec_k[i])
            builder.add(k, init_evals + step_cost * k, float(rec_f[i]))
    builder.steps = done
    builder.sum_absf = sum_absf
    if builder.ks[-1] != done:
        builder.add(done, init_evals + step_cost * done, problem.eval(x))
    trajectory = builder.build(aborted, "non-finite update" if aborted else None)
    if aborted:
        raise SolverAbortError(
            f"{kind}: non-finite update at iteration {done + 1}", trajectory
        )
    return trajectory


def run(
    config: SolverConfig,
    problem: ProblemSpec,
    noise: NoiseModel,
    seed: int,
    *,
    stream_id: int = 0,
    record_stride: int = 1,
    use_fastpath: bool | None = None,
) -> Trajectory:
    """Run one solver trial; deterministic given (config, seed, stream_id).

    The trajectory records the initial point at zero evaluations and one
    entry per ``record_stride`` iterations (the final iteration is always
    recorded). The run stops at whichever of iteration_limit / eval_budget
    binds first. A non-finite update raises SolverAbortError with the
    partial trajectory attached.
    """
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    cfg = config.resolve(problem, noise)
    stream = RngStream(seed, stream_id)
    rng = stream.derive(DIRECTION_TAG)
    oracle = NoisyOracle(problem, noise, stream.derive(NOISE_TAG))
    kernel_ok = (
        cfg.kind != "rp"
        and _kernels.problem_id(problem.name) is not None
        and use_fastpath is not False
    )
    if kernel_ok:
        return _run_kernel(problem, noise, cfg, rng, oracle, record_stride)
    return _run_reference(problem, noise, cfg, rng, oracle, record_stride)
