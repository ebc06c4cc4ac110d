"""Parameter estimators for problems whose constants are unknown.

Noise levels come from replicated evaluations at a fixed point, the
gradient Lipschitz constant from the spectral norm of a central-difference
Hessian of the replicate-averaged function, and the gradient-surrogate
variance from repeated zero-order gradient draws. All estimators are
deterministic given the oracle's stream and their inputs; probe directions
are derived from the oracle's stream (tag 2), so repeated calls on the
same oracle replay the same directions with fresh noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ESTIMATOR_TAG,
    EstimationError,
    NoiseDominatedError,
    NoisyOracle,
    as_vector,
)

__all__ = [
    "EstimateReport",
    "estimate_sigma_additive",
    "estimate_sigma_relative",
    "estimate_L1_saa",
    "estimate_grad_var",
]

# Fixed start vector seed for the Hessian power iteration; independent of
# every experiment stream.
_POWER_SEED = 0x5EED


@dataclass(frozen=True)
class EstimateReport:
    value: float
    sample_count: int
    dispersion: float


def _replicates(oracle: NoisyOracle, x, m: int) -> np.ndarray:
    if m < 2:
        raise ValueError(f"need m >= 2 replicates, got {m}")
    x = as_vector(x, oracle.problem.n)
    return np.array([oracle.evaluate(x) for _ in range(m)])


def _std_standard_error(values: np.ndarray) -> float:
    """Moment-based standard error of the sample standard deviation.

    Uses Var(s^2) ~= (m4 - s^4 (m-3)/(m-1)) / m with the sample fourth
    central moment m4, so no distributional form is assumed.
    """
    m = len(values)
    s2 = values.var(ddof=1)
    if s2 == 0:
        return 0.0
    m4 = np.mean((values - values.mean()) ** 4)
    var_s2 = max(0.0, (m4 - s2**2 * (m - 3) / (m - 1)) / m)
    return math.sqrt(var_s2) / (2.0 * math.sqrt(s2))


def estimate_sigma_additive(oracle: NoisyOracle, x, m: int) -> EstimateReport:
    """Additive noise level as the sample standard deviation (ddof=1) of m
    replicated evaluations at x. Intended for m >= 30."""
    values = _replicates(oracle, x, m)
    return EstimateReport(
        value=float(values.std(ddof=1)),
        sample_count=m,
        dispersion=_std_standard_error(values),
    )


def estimate_sigma_relative(oracle: NoisyOracle, x, m: int) -> EstimateReport:
    """Relative noise level as replicate std divided by |replicate mean|.

    Requires the signal to dominate: |mean| must exceed 10 standard errors
    of the mean, otherwise the ratio is meaningless and
    NoiseDominatedError is raised (e.g. at a root of f).
    """
    values = _replicates(oracle, x, m)
    mean = float(values.mean())
    s = float(values.std(ddof=1))
    se_mean = s / math.sqrt(m)
    if abs(mean) <= 10.0 * se_mean:
        raise NoiseDominatedError(
            f"|mean|={abs(mean):.3e} <= 10 standard errors ({10 * se_mean:.3e}); "
            "relative noise is undefined where the signal vanishes"
        )
    se_s = _std_standard_error(values)
    # delta method for s/|mean|
    dispersion = math.hypot(se_s / abs(mean), s * se_mean / mean**2)
    return EstimateReport(value=s / abs(mean), sample_count=m, dispersion=dispersion)


def _averaged_value(oracle: NoisyOracle, x: np.ndarray, samples: int) -> float:
    total = 0.0
    for _ in range(samples):
        total += oracle.evaluate(x)
    return total / samples


def estimate_L1_saa(
    oracle: NoisyOracle, x0, samples: int = 200, fd_step: float = 1e-2
) -> EstimateReport:
    """Gradient Lipschitz constant from the averaged-function Hessian.

    Builds f_bar(x) as the mean of ``samples`` noisy evaluations per probe
    point, forms the central-difference Hessian of f_bar at x0 with step
    fd_step (exact for quadratics up to residual noise), and returns its
    spectral norm from power iteration (50 rounds or 1e-8 relative change).
    Probe cost is samples * (2 n^2 + 1) evaluations.
    """
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    if fd_step <= 0:
        raise ValueError(f"need fd_step > 0, got {fd_step}")
    x0 = as_vector(x0, oracle.problem.n)
    n = oracle.problem.n
    h = fd_step

    def fbar(point: np.ndarray) -> float:
        return _averaged_value(oracle, point, samples)

    f_center = fbar(x0)
    hessian = np.empty((n, n))
    eye = np.eye(n)
    for i in range(n):
        f_plus = fbar(x0 + h * eye[i])
        f_minus = fbar(x0 - h * eye[i])
        hessian[i, i] = (f_plus - 2.0 * f_center + f_minus) / h**2
    for i in range(n):
        for j in range(i + 1, n):
            step_i, step_j = h * eye[i], h * eye[j]
            fpp = fbar(x0 + step_i + step_j)
            fpm = fbar(x0 + step_i - step_j)
            fmp = fbar(x0 - step_i + step_j)
            fmm = fbar(x0 - step_i - step_j)
            hessian[i, j] = hessian[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h**2)
    if not np.all(np.isfinite(hessian)):
        raise EstimationError("non-finite Hessian entries in the SAA estimate")

    start_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_POWER_SEED)))
    v = start_rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    change = math.inf
    evals_used = samples * (2 * n * n + 1)
    for _ in range(50):
        w = hessian @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            lam = 0.0
            change = 0.0
            break
        v = w / norm
        lam_new = float(abs(v @ (hessian @ v)))
        change = abs(lam_new - lam) / max(abs(lam_new), 1e-300)
        lam = lam_new
        if change <= 1e-8:
            break
    return EstimateReport(value=lam, sample_count=evals_used, dispersion=change)


def estimate_grad_var(
    oracle: NoisyOracle, points, mu: float, m: int
) -> EstimateReport:
    """Maximum over points of the total variance of the zero-order gradient
    estimate G_mu = (f~(x + mu u) - f~(x)) / mu * u.

    Total variance is the trace of the componentwise sample variance
    (ddof=1) over m draws; the maximum over the probe points is returned.
    Directions are drawn from a stream derived off the oracle's.
    """
    if len(points) < 2:
        raise ValueError("need at least 2 probe points")
    if m < 2:
        raise ValueError(f"need m >= 2 draws per point, got {m}")
    if mu <= 0:
        raise ValueError(f"need mu > 0, got {mu}")
    rng = oracle.rng.derive(ESTIMATOR_TAG)
    n = oracle.problem.n
    worst = -math.inf
    worst_disp = 0.0
    for point in points:
        x = as_vector(point, n)
        draws = np.empty((m, n))
        for r in range(m):
            u = rng.normals(n)
            f0 = oracle.evaluate(x)
            fplus = oracle.evaluate(x + mu * u)
            draws[r] = (fplus - f0) / mu * u
        total_var = float(draws.var(axis=0, ddof=1).sum())
        if total_var > worst:
            worst = total_var
            # normal-theory approximation, reported as a rough scale only
            worst_disp = total_var * math.sqrt(2.0 / (m - 1))
    return EstimateReport(value=worst, sample_count=m, dispersion=worst_disp)
