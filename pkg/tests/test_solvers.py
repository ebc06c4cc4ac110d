import math

import mpmath as mp
import numpy as np
import pytest

from starsopt import (
    ConfigError,
    NoiseModel,
    NoisyOracle,
    RngStream,
    SolverAbortError,
    SolverConfig,
    rg_mu,
    rsgf_gamma,
    run,
    sphere_make,
    ss_stepsizes,
)
from starsopt.solvers import (
    _EsSolver,
    _RpSolver,
    _StarsSolver,
    _golden_section,
)

from conftest import ScriptedOracle, StubRng, make_oracle

mp.mp.dps = 50

GOLDEN_PROBES_DEFAULT = 20  # 2 + (ceil(ln(0.0025/20)/ln(invphi)) - 1)


class TestStepsizeFormulas:
    def test_rg_mu_values(self):
        expected = mp.mpf(5) / (3 * 12) * mp.sqrt(mp.mpf(2) ** -16 / 8)
        assert rg_mu(2.0**-16, 4.0, 8) == pytest.approx(float(expected), rel=1e-12)
        assert rg_mu(2.0**-16, 4.0, 8) == pytest.approx(1.91815e-4, rel=1e-4)
        expected = mp.mpf(5) / 36 * mp.sqrt(mp.mpf("0.1") / 8)
        assert rg_mu(0.1, 4.0, 8) == pytest.approx(float(expected), rel=1e-12)
        assert rg_mu(0.1, 4.0, 8) == pytest.approx(1.5528e-2, rel=1e-4)

    def test_rg_mu_sqrt_scaling(self):
        assert rg_mu(0.4, 4.0, 8) == pytest.approx(2 * rg_mu(0.1, 4.0, 8), rel=1e-12)

    def test_ss_stepsizes(self):
        h, mu = ss_stepsizes(L0=5.0, R2=3.0, epsilon=0.1, N=9999, n=8)
        assert h == pytest.approx(float(mp.sqrt(3) / 6000), rel=1e-12)
        assert h == pytest.approx(2.8868e-4, rel=1e-4)
        assert mu == pytest.approx(0.1 / (10 * math.sqrt(8)), rel=1e-12)
        assert mu == pytest.approx(3.5355e-3, rel=1e-4)

    def test_ss_h_scaling_with_horizon(self):
        h1, _ = ss_stepsizes(5.0, 3.0, 0.1, 99, 8)
        h2, _ = ss_stepsizes(5.0, 3.0, 0.1, 399, 8)
        assert h2 == pytest.approx(h1 / 2, rel=1e-12)

    def test_rsgf_gamma_first_branch(self):
        gamma = rsgf_gamma(4.0, 1e-3, 1.0, 8, 10_000)
        assert gamma == pytest.approx(1.0 / (4 * 4 * 12), rel=1e-12)
        assert gamma == pytest.approx(0.0052083, rel=1e-4)

    def test_rsgf_gamma_guard_uses_R2(self):
        # degenerate start value falls back to D = sqrt(R2)
        sigma_est, n, N = 10.0, 8, 10_000
        gamma = rsgf_gamma(4.0, sigma_est, 0.0, n, N, R2=3.0)
        expected = math.sqrt(3.0) / (sigma_est * math.sqrt(N)) / math.sqrt(12)
        assert gamma == pytest.approx(expected, rel=1e-12)
        # without R2 the proxy is 1
        gamma = rsgf_gamma(4.0, sigma_est, -1.0, n, N)
        assert gamma == pytest.approx(1.0 / (sigma_est * math.sqrt(N)) / math.sqrt(12), rel=1e-12)

    def test_rsgf_gamma_never_exceeds_step_length(self):
        for sigma_est in (1e-6, 1e-3, 1.0, 100.0):
            gamma = rsgf_gamma(4.0, sigma_est, 0.5, 8, 5000, R2=3.0)
            assert gamma <= 1.0 / (4 * 4 * 12) + 1e-18


class TestGoldenSection:
    def test_probe_count_arithmetic(self):
        inv_phi = (math.sqrt(5) - 1) / 2
        shrinks = math.ceil(math.log(0.0025 / 20) / math.log(inv_phi))
        assert 2 + (shrinks - 1) == GOLDEN_PROBES_DEFAULT

    def test_quadratic_minimum(self):
        calls = []

        def probe(t):
            calls.append(t)
            return (2.0 + t) ** 2

        t, used, exhausted = _golden_section(probe, -10.0, 10.0, 0.0025, math.inf)
        assert not exhausted
        assert used == len(calls) == GOLDEN_PROBES_DEFAULT
        assert abs(t - (-2.0)) <= 0.0025

    def test_exhaustion_returns_best_probe(self):
        values = []

        def probe(t):
            values.append((t, (t - 3.0) ** 2))
            return values[-1][1]

        t, used, exhausted = _golden_section(probe, -10.0, 10.0, 0.0025, 5)
        assert exhausted and used == 5
        best = min(values, key=lambda pair: pair[1])[0]
        assert t == best


class TestStarsStep:
    def test_hand_computed_forward_difference(self):
        # noiseless sphere in one dimension, forced direction u = 1,
        # overridden stepsizes mu = 1e-6, h = 1/20
        problem = sphere_make(1)
        oracle = NoisyOracle(problem, NoiseModel("add", 0.0), RngStream(0).derive(1))
        cfg = SolverConfig("stars", iteration_limit=1, sigma=1e-3).resolve(
            problem, NoiseModel("add", 1e-3)
        )
        solver = _StarsSolver(problem, oracle, StubRng([[1.0]]), cfg, NoiseModel("add", 1e-3))
        solver.mu_fixed = 1e-6
        solver.h = 1 / 20
        acc_before = problem.eval(solver.x) - problem.f_star
        solver.step()
        expected_s = ((1.0 + 1e-6) ** 2 - 1.0) / 1e-6
        assert expected_s == pytest.approx(2.000001, rel=1e-9)
        assert solver.x[0] == 1.0 - (1 / 20) * expected_s * 1.0
        assert solver.x[0] == pytest.approx(0.9, abs=1e-7)
        assert problem.eval(solver.x) - problem.f_star < acc_before

    def test_init_consumes_one_eval_and_fixes_stepsizes(self, f1_8):
        oracle = make_oracle(f1_8, "add", 1e-3)
        cfg = SolverConfig("stars", iteration_limit=1).resolve(f1_8, NoiseModel("add", 1e-3))
        solver = _StarsSolver(f1_8, oracle, StubRng([np.ones(8)]), cfg, NoiseModel("add", 1e-3))
        assert oracle.eval_count == 1
        assert solver.h == 1 / 192
        assert solver.mu_fixed == pytest.approx(6.1790e-3, rel=1e-4)

    def test_multiplicative_uses_dynamic_mu(self, f1_8):
        noise = NoiseModel("mult", 1e-3)
        oracle = make_oracle(f1_8, "mult", 1e-3)
        cfg = SolverConfig("stars", iteration_limit=1).resolve(f1_8, noise)
        solver = _StarsSolver(f1_8, oracle, StubRng([np.ones(8)]), cfg, noise)
        assert solver.c4_value == pytest.approx(7.3481e-3, rel=1e-4)
        assert solver.mu_fixed is None
        assert solver.step_cost == 3

    def test_sigma_validation(self, f1_8):
        with pytest.raises(ConfigError):
            run(SolverConfig("stars", iteration_limit=1, sigma=0.0), f1_8,
                NoiseModel("add", 0.0), seed=0)
        with pytest.raises(ConfigError):
            run(SolverConfig("stars", iteration_limit=1, sigma=0.6), f1_8,
                NoiseModel("mult", 0.5), seed=0)


class TestEvalAccounting:
    @pytest.mark.parametrize("use_fastpath", [True, False])
    def test_stars_additive_2n_plus_1(self, f1_8, use_fastpath):
        t = run(SolverConfig("stars", iteration_limit=57), f1_8,
                NoiseModel("add", 1e-3), seed=0, use_fastpath=use_fastpath)
        assert t.k[-1] == 57 and t.nevals[-1] == 2 * 57 + 1

    @pytest.mark.parametrize("use_fastpath", [True, False])
    def test_stars_multiplicative_3n_plus_1(self, f1_8, use_fastpath):
        t = run(SolverConfig("stars", iteration_limit=57), f1_8,
                NoiseModel("mult", 1e-3), seed=0, use_fastpath=use_fastpath)
        assert t.nevals[-1] == 3 * 57 + 1

    @pytest.mark.parametrize("kind", ["rg", "ss", "rsgf", "es"])
    def test_two_eval_solvers(self, f1_8, kind):
        cfg = SolverConfig(kind, iteration_limit=41,
                           sigma_est=1.0 if kind == "rsgf" else None)
        t = run(cfg, f1_8, NoiseModel("add", 1e-3), seed=0)
        assert t.nevals[-1] == 2 * 41

    def test_rp_probe_sums(self, f1_8):
        t = run(SolverConfig("rp", iteration_limit=7), f1_8,
                NoiseModel("add", 1e-3), seed=0)
        probes = np.diff(t.nevals)
        assert np.all(probes == GOLDEN_PROBES_DEFAULT)
        assert t.nevals[-1] == 7 * GOLDEN_PROBES_DEFAULT

    def test_budget_2001_gives_1000_iterations(self, f1_8):
        t = run(SolverConfig("stars", eval_budget=2001), f1_8,
                NoiseModel("add", 1e-3), seed=0)
        assert t.k[-1] == 1000 and t.nevals[-1] == 2001

    def test_budget_zero_initial_record_only(self, f1_8):
        for kind in ("stars", "rg", "es", "rp"):
            t = run(SolverConfig(kind, eval_budget=0), f1_8, NoiseModel("add", 1e-3), seed=0)
            assert len(t) == 1
            assert t.k[0] == 0 and t.nevals[0] == 0
            assert t.acc[0] == pytest.approx(4 / 9, rel=1e-12)

    def test_budget_binds_before_iteration_limit(self, f1_8):
        t = run(SolverConfig("rg", iteration_limit=10_000, eval_budget=64), f1_8,
                NoiseModel("add", 1e-3), seed=0)
        assert t.k[-1] == 32


class TestRunContract:
    def test_same_seed_bitwise_identical(self, f1_8):
        a = run(SolverConfig("stars", eval_budget=501), f1_8, NoiseModel("add", 1e-3), seed=3)
        b = run(SolverConfig("stars", eval_budget=501), f1_8, NoiseModel("add", 1e-3), seed=3)
        for field in ("k", "nevals", "f_true", "acc"):
            assert np.array_equal(getattr(a, field), getattr(b, field))
        assert a.mean_abs_f == b.mean_abs_f

    def test_trajectory_invariants(self, f1_8):
        t = run(SolverConfig("stars", iteration_limit=100), f1_8,
                NoiseModel("add", 1e-3), seed=1)
        assert np.array_equal(t.k, np.arange(101))  # initial point plus one per iteration
        assert np.all(np.diff(t.nevals) > 0)
        assert np.all(np.isfinite(t.f_true))

    def test_record_stride_keeps_final(self, f1_8):
        t = run(SolverConfig("stars", iteration_limit=100), f1_8,
                NoiseModel("add", 1e-3), seed=1, record_stride=7)
        assert t.k[0] == 0 and t.k[-1] == 100
        assert set(np.diff(t.k)[:-1]) == {7}

    def test_limits_must_be_set(self, f1_8):
        with pytest.raises(ConfigError):
            run(SolverConfig("stars"), f1_8, NoiseModel("add", 1e-3), seed=0)

    @pytest.mark.parametrize("use_fastpath", [True, False])
    def test_abort_carries_partial_trajectory(self, use_fastpath):
        # an absurd curvature constant makes the first update overshoot so
        # hard the next difference quotient is no longer finite
        problem = sphere_make(4)
        cfg = SolverConfig("rg", iteration_limit=50, L1=1e-300)
        with pytest.raises(SolverAbortError) as info:
            run(cfg, problem, NoiseModel("add", 0.0), seed=0, use_fastpath=use_fastpath)
        partial = info.value.trajectory
        assert partial is not None and partial.aborted
        assert 1 <= len(partial.k) <= 3


class TestStarsDescent:
    def test_mean_accuracy_improves_with_budget(self, f1_8):
        cfg = SolverConfig("stars", eval_budget=20_000)
        noise = NoiseModel("add", 1e-3)
        early, late = [], []
        for trial in range(20):
            t = run(cfg, f1_8, noise, seed=0, stream_id=trial)
            early.append(np.interp(1_000, t.nevals, t.acc))
            late.append(t.acc[-1])
        assert np.mean(late) < np.mean(early)


class TestEs:
    def test_stepsize_multipliers(self, sphere_8):
        # scripted comparisons: child better, then child worse
        oracle = ScriptedOracle(sphere_8, [1.0, 0.5, 1.0, 2.0])
        cfg = SolverConfig("es", iteration_limit=2, sigma0=0.1).resolve(
            sphere_8, NoiseModel("add", 1e-3)
        )
        solver = _EsSolver(sphere_8, oracle, StubRng([np.ones(8) / 10]), cfg)
        solver.step()
        assert solver.sigma == pytest.approx(0.13956, rel=1e-12)
        solver.step()
        assert solver.sigma == pytest.approx(0.13956 * 0.8840, rel=1e-12)

    def test_acceptance_is_order_invariant(self, sphere_8):
        script = [1.0, 0.5, 0.8, 2.0, 1.5, 1.5, 0.3, 0.9]
        directions = [np.ones(8) * s for s in (0.1, -0.2, 0.05, 0.15)]
        cfg = SolverConfig("es", iteration_limit=4).resolve(sphere_8, NoiseModel("add", 1e-3))

        def final_x(values):
            oracle = ScriptedOracle(sphere_8, values)
            solver = _EsSolver(sphere_8, oracle, StubRng(directions), cfg)
            for _ in range(4):
                solver.step()
            return solver.x.copy(), solver.sigma

        # any strictly increasing transform preserves every comparison
        x_raw, sigma_raw = final_x(script)
        x_tr, sigma_tr = final_x([math.exp(v) for v in script])
        assert np.array_equal(x_raw, x_tr)
        assert sigma_raw == sigma_tr

    def test_ties_accept(self, sphere_8):
        oracle = ScriptedOracle(sphere_8, [1.0, 1.0])
        cfg = SolverConfig("es", iteration_limit=1).resolve(sphere_8, NoiseModel("add", 1e-3))
        solver = _EsSolver(sphere_8, oracle, StubRng([np.ones(8)]), cfg)
        x_before = solver.x.copy()
        solver.step()
        assert not np.array_equal(solver.x, x_before)
        assert solver.sigma == pytest.approx(1.3956)

    def test_noiseless_sphere_monotone(self, sphere_8):
        t = run(SolverConfig("es", iteration_limit=400), sphere_8,
                NoiseModel("add", 0.0), seed=5)
        assert np.all(np.diff(t.acc) <= 0)


class TestRp:
    def test_noiseless_line_search_lands_on_axis_minimum(self):
        problem = sphere_make(1)
        oracle = NoisyOracle(problem, NoiseModel("add", 0.0), RngStream(0).derive(1))
        cfg = SolverConfig("rp", iteration_limit=1).resolve(problem, NoiseModel("add", 0.0))
        solver = _RpSolver(problem, oracle, StubRng([[1.0]]), cfg)
        solver.x = np.array([2.0])
        solver.step()
        assert abs(solver.x[0]) <= 0.0025
        assert oracle.eval_count == GOLDEN_PROBES_DEFAULT

    def test_mirrored_direction_same_iterate(self):
        problem = sphere_make(1)
        cfg = SolverConfig("rp", iteration_limit=1).resolve(problem, NoiseModel("add", 0.0))

        def one_step(direction):
            oracle = NoisyOracle(problem, NoiseModel("add", 0.0), RngStream(0).derive(1))
            solver = _RpSolver(problem, oracle, StubRng([[direction]]), cfg)
            solver.x = np.array([2.0])
            solver.step()
            return solver.x[0]

        assert one_step(1.0) == pytest.approx(one_step(-1.0), abs=1e-9)

    def test_line_minimum_orthogonal_gradient(self):
        problem = sphere_make(4)
        oracle = NoisyOracle(problem, NoiseModel("add", 0.0), RngStream(2).derive(1))
        cfg = SolverConfig("rp", iteration_limit=1).resolve(problem, NoiseModel("add", 0.0))
        u = np.array([0.3, -1.2, 0.8, 0.5])
        solver = _RpSolver(problem, oracle, StubRng([u]), cfg)
        solver.step()
        slope = abs(float(problem.grad(solver.x) @ u))
        assert slope <= 0.0025 * problem.L1 * float(u @ u)

    def test_budget_exhaustion_returns_best_so_far(self, sphere_8):
        t = run(SolverConfig("rp", eval_budget=11), sphere_8, NoiseModel("add", 0.0), seed=0)
        assert t.nevals[-1] <= 11
        assert len(t) == 2  # initial plus the one truncated step


class TestNoiselessSanity:
    @pytest.mark.parametrize("kind", ["stars", "rg", "ss", "rsgf", "rp", "es"])
    def test_reaches_1e_minus_3_within_budget(self, sphere_8, kind):
        # noise-free oracle; stars and rsgf get a tiny assumed noise level
        cfg = SolverConfig(
            kind,
            eval_budget=100_000,
            sigma=1e-6 if kind == "stars" else None,
            sigma_est=1e-6 if kind == "rsgf" else None,
        )
        t = run(cfg, sphere_8, NoiseModel("add", 0.0), seed=9)
        assert t.acc.min() <= 1e-3
        assert t.acc[-1] <= 1e-3
