"""Compiled inner loops for the step-driven solvers.

Each kernel advances one solver over a chunk of pre-drawn directions U
(one row per iteration) and noise values V (one row per iteration, one
column per evaluation in step order). The draws come from the same
generators the reference path uses, and numpy generators fill blocks
element-by-element, so the consumed values are bitwise identical to
per-call draws. All arithmetic mirrors the reference step order exactly
(scalar IEEE ops, no fused multiply-add), which the test suite checks by
comparing whole trajectories bitwise against the pure-Python path.

Kernels return ``(steps_done, n_records, aborted)`` plus updated scalar
state. On abort (non-finite update) the failing step is not counted and
the caller charges the evaluations consumed before the failure.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .problems import _f1_value, _sphere_value

PROBLEM_IDS = {"f1": 0, "sphere": 1}

# Noise evaluations consumed within an aborted step, by solver family.
ABORT_EVALS = {"stars_add": 1, "stars_mult": 2, "fixed_mu": 2, "es": 2}


def problem_id(name: str) -> int | None:
    return PROBLEM_IDS.get(name)


@njit(cache=True)
def _value(pid, x):
    if pid == 0:
        return _f1_value(x)
    return _sphere_value(x)


@njit(cache=True)
def stars_chunk(
    pid, mult, x, cached, h, mu_fixed, c4_value, mu_min,
    U, V, sum_absf, k0, stride, rec_k, rec_f,
):
    """Noise-adjusted random search steps.

    Per iteration: draw u; set mu (fixed in the additive mode, or
    C4 sqrt(|f~(x)|) from one fresh evaluation in the multiplicative
    mode); forward difference against the cached value; move; re-evaluate
    and cache at the new point. V columns: [nu1, nu2] additive,
    [nu_mu, nu1, nu2] multiplicative.
    """
    n = x.shape[0]
    nrec = 0
    for j in range(U.shape[0]):
        u = U[j]
        if mult:
            f3 = _value(pid, x) * (1.0 + V[j, 0])
            mu = c4_value * math.sqrt(abs(f3))
            if mu_min > mu:
                mu = mu_min
            nu1 = V[j, 1]
            nu2 = V[j, 2]
        else:
            mu = mu_fixed
            nu1 = V[j, 0]
            nu2 = V[j, 1]
        fval = _value(pid, x + mu * u)
        if mult:
            fplus = fval * (1.0 + nu1)
        else:
            fplus = fval + nu1
        s = (fplus - cached) / mu
        hs = h * s
        ok = math.isfinite(s)
        for i in range(n):
            xi = x[i] - hs * u[i]
            if not math.isfinite(xi):
                ok = False
        if not ok:
            return cached, j, sum_absf, nrec, True
        for i in range(n):
            x[i] = x[i] - hs * u[i]
        fx = _value(pid, x)
        if mult:
            cached = fx * (1.0 + nu2)
        else:
            cached = fx + nu2
        sum_absf += abs(fx)
        k = k0 + j + 1
        if k % stride == 0:
            rec_k[nrec] = k
            rec_f[nrec] = fx
            nrec += 1
    return cached, U.shape[0], sum_absf, nrec, False


@njit(cache=True)
def fixed_mu_chunk(
    pid, mult, x, gamma, mu, U, V, sum_absf, k0, stride, rec_k, rec_f,
):
    """Forward-difference steps with fixed smoothing stepsize mu and step
    length gamma; both points evaluated fresh each iteration (V columns
    [nu_at_x, nu_at_x_plus])."""
    n = x.shape[0]
    nrec = 0
    for j in range(U.shape[0]):
        u = U[j]
        f0 = _value(pid, x)
        fp = _value(pid, x + mu * u)
        if mult:
            f0n = f0 * (1.0 + V[j, 0])
            fpn = fp * (1.0 + V[j, 1])
        else:
            f0n = f0 + V[j, 0]
            fpn = fp + V[j, 1]
        s = (fpn - f0n) / mu
        gs = gamma * s
        ok = math.isfinite(s)
        for i in range(n):
            xi = x[i] - gs * u[i]
            if not math.isfinite(xi):
                ok = False
        if not ok:
            return j, sum_absf, nrec, True
        for i in range(n):
            x[i] = x[i] - gs * u[i]
        fx = _value(pid, x)
        sum_absf += abs(fx)
        k = k0 + j + 1
        if k % stride == 0:
            rec_k[nrec] = k
            rec_f[nrec] = fx
            nrec += 1
    return U.shape[0], sum_absf, nrec, False


@njit(cache=True)
def es_chunk(
    pid, mult, x, sigma, c_s, c_f, U, V, sum_absf, k0, stride, rec_k, rec_f,
):
    """(1+1) evolution strategy steps: accept the mutant on a noisy
    comparison (ties accept), multiply the stepsize by c_s on success and
    c_f on failure. V columns [nu_parent, nu_child]."""
    n = x.shape[0]
    nrec = 0
    child = np.empty(n)
    for j in range(U.shape[0]):
        u = U[j]
        fpar = _value(pid, x)
        for i in range(n):
            child[i] = x[i] + sigma * u[i]
        fchi = _value(pid, child)
        if mult:
            fpar_n = fpar * (1.0 + V[j, 0])
            fchi_n = fchi * (1.0 + V[j, 1])
        else:
            fpar_n = fpar + V[j, 0]
            fchi_n = fchi + V[j, 1]
        if fchi_n <= fpar_n:
            accept = True
            sigma_new = c_s * sigma
        else:
            accept = False
            sigma_new = c_f * sigma
        ok = math.isfinite(sigma_new)
        if accept:
            for i in range(n):
                if not math.isfinite(child[i]):
                    ok = False
        if not ok:
            return sigma, j, sum_absf, nrec, True
        sigma = sigma_new
        if accept:
            for i in range(n):
                x[i] = child[i]
        fx = _value(pid, x)
        sum_absf += abs(fx)
        k = k0 + j + 1
        if k % stride == 0:
            rec_k[nrec] = k
            rec_f[nrec] = fx
            nrec += 1
    return sigma, U.shape[0], sum_absf, nrec, False
