"""Deterministic test objectives with analytic gradients and metadata.

The value functions are compiled with numba and written as sequential
scalar loops. The solver fast path inlines the same compiled functions, so
reference and compiled trajectories agree bitwise.

Metadata conventions:
  * L1 is the gradient Lipschitz constant (spectral norm bound on the
    Hessian), L0 a bound on the gradient norm over the ball of radius
    sqrt(R2) around the minimizer: L0 = L1 * sqrt(R2) + 1. L0 is only
    consumed by solvers that need a function Lipschitz constant; an
    over-estimate merely shrinks their steps.
  * R2 bounds the squared distance from the canonical start to the
    minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

__all__ = ["ProblemSpec", "f1_make", "sphere_make", "PROBLEM_FACTORIES"]


@njit(cache=True)
def _f1_value(x):
    n = x.shape[0]
    acc = 0.5 * x[0] * x[0]
    for i in range(n - 1):
        d = x[i + 1] - x[i]
        acc += 0.5 * d * d
    acc += 0.5 * x[n - 1] * x[n - 1]
    return acc - x[0]


@njit(cache=True)
def _sphere_value(x):
    acc = 0.0
    for i in range(x.shape[0]):
        acc += x[i] * x[i]
    return acc


@dataclass(frozen=True)
class ProblemSpec:
    """A smooth objective with gradient, optimum, and solver metadata."""

    name: str
    n: int
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    x_star: np.ndarray = field(repr=False)
    f_star: float
    L0: float
    L1: float
    R2: float
    x0: np.ndarray = field(repr=False)


def f1_make(n: int) -> ProblemSpec:
    """Chained quadratic in n variables with a tridiagonal Hessian.

    f(x) = (x_1)^2/2 + sum_i (x_{i+1} - x_i)^2/2 + (x_n)^2/2 - x_1, so the
    gradient is A x - e_1 with A = tridiag(-1, 2, -1). The unique minimizer
    is x*_i = 1 - i/(n+1) with f* = -n/(2(n+1)). The start point is the
    origin; ||x0 - x*||^2 <= (n+1)/3 and ||A||_2 < 4.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")

    def evaluate(x: np.ndarray) -> float:
        return float(_f1_value(np.ascontiguousarray(x, dtype=np.float64)))

    def gradient(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = 2.0 * x
        g[1:] -= x[:-1]
        g[:-1] -= x[1:]
        g[0] -= 1.0
        return g

    i = np.arange(1, n + 1, dtype=float)
    x_star = 1.0 - i / (n + 1)
    f_star = -n / (2.0 * (n + 1))
    L1 = 4.0
    R2 = (n + 1) / 3.0
    return ProblemSpec(
        name="f1",
        n=n,
        eval=evaluate,
        grad=gradient,
        x_star=x_star,
        f_star=f_star,
        L0=L1 * math.sqrt(R2) + 1.0,
        L1=L1,
        R2=R2,
        x0=np.zeros(n),
    )


def sphere_make(n: int) -> ProblemSpec:
    """f(x) = ||x||^2 started from the all-ones vector."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")

    def evaluate(x: np.ndarray) -> float:
        return float(_sphere_value(np.ascontiguousarray(x, dtype=np.float64)))

    def gradient(x: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=float)

    L1 = 2.0
    R2 = float(n)
    return ProblemSpec(
        name="sphere",
        n=n,
        eval=evaluate,
        grad=gradient,
        x_star=np.zeros(n),
        f_star=0.0,
        L0=L1 * math.sqrt(R2) + 1.0,
        L1=L1,
        R2=R2,
        x0=np.ones(n),
    )


PROBLEM_FACTORIES = {"f1": f1_make, "sphere": sphere_make}
