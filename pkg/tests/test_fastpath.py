"""The compiled kernels must replay the pure-Python solvers bitwise.

Every kernelized solver is compared against the reference path over both
noise kinds and both built-in problems: identical records, identical
running mean of |f|, identical abort behavior. This is the contract that
justifies using the kernels for the large protocol runs.
"""

import numpy as np
import pytest

from starsopt import (
    NoiseModel,
    SolverAbortError,
    SolverConfig,
    f1_make,
    run,
    sphere_make,
)

KERNEL_SOLVERS = ["stars", "rg", "ss", "rsgf", "es"]


def both_paths(cfg, problem, noise, seed=11, stream_id=2, record_stride=1):
    out = []
    for fastpath in (True, False):
        try:
            out.append(
                run(cfg, problem, noise, seed, stream_id=stream_id,
                    record_stride=record_stride, use_fastpath=fastpath)
            )
        except SolverAbortError as exc:  # divergent configs abort identically
            out.append(exc.trajectory)
    return out


def assert_identical(fast, ref):
    assert np.array_equal(fast.k, ref.k)
    assert np.array_equal(fast.nevals, ref.nevals)
    assert np.array_equal(fast.f_true, ref.f_true)
    assert np.array_equal(fast.acc, ref.acc)
    assert fast.mean_abs_f == ref.mean_abs_f
    assert fast.aborted == ref.aborted


@pytest.mark.parametrize("solver", KERNEL_SOLVERS)
@pytest.mark.parametrize("kind,sigma", [("add", 1e-3), ("mult", 1e-3), ("add", 1e-1)])
@pytest.mark.parametrize("problem_name", ["f1", "sphere"])
def test_bitwise_equal_trajectories(solver, kind, sigma, problem_name):
    problem = (f1_make if problem_name == "f1" else sphere_make)(8)
    cfg = SolverConfig(
        solver,
        iteration_limit=700,
        sigma_est=1.0 if solver == "rsgf" else None,
    )
    fast, ref = both_paths(cfg, problem, NoiseModel(kind, sigma))
    assert_identical(fast, ref)


def test_bitwise_equal_with_budget_and_stride():
    problem = f1_make(12)
    cfg = SolverConfig("stars", eval_budget=4_321)
    fast, ref = both_paths(cfg, problem, NoiseModel("mult", 1e-2), record_stride=13)
    assert_identical(fast, ref)
    assert fast.k[-1] == (4_321 - 1) // 3


def test_bitwise_equal_across_chunk_boundary():
    # chunked pre-draws must consume the streams exactly like per-call draws
    problem = sphere_make(4)
    cfg = SolverConfig("rg", iteration_limit=9_000)
    fast, ref = both_paths(cfg, problem, NoiseModel("add", 1e-2))
    assert_identical(fast, ref)


@pytest.mark.parametrize("stride", [1, 5])
def test_abort_is_bitwise_equal_too(stride):
    problem = sphere_make(4)
    cfg = SolverConfig("rg", iteration_limit=50, L1=1e-300)
    results = []
    for fastpath in (True, False):
        try:
            run(cfg, problem, NoiseModel("add", 0.0), seed=0,
                record_stride=stride, use_fastpath=fastpath)
            raise AssertionError("expected an abort")
        except SolverAbortError as exc:
            results.append(exc.trajectory)
    assert_identical(results[0], results[1])
