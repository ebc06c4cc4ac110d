"""Derivative-free stochastic optimization under additive and relative noise.

Noise-adjusted-stepsize random search plus five randomized zero-order
baselines, closed-form theory calculators, parameter estimators, and a
seeded experiment harness.
"""

from .core import (
    ConfigError,
    EstimationError,
    NoiseDominatedError,
    NoiseKind,
    NoiseModel,
    NoisyOracle,
    RngStream,
    SolverAbortError,
    gaussian_vector,
    noisy_eval,
    uniform_noise,
)
from .estimation import (
    EstimateReport,
    estimate_grad_var,
    estimate_L1_saa,
    estimate_sigma_additive,
    estimate_sigma_relative,
)
from .harness import (
    AggregateSeries,
    CellResult,
    ExperimentConfig,
    aggregate,
    mean_final_accuracy,
    run_experiment,
    write_aggregate_csv,
    write_trial_csv,
)
from .problems import ProblemSpec, f1_make, sphere_make
from .solvers import SolverConfig, Trajectory, rg_mu, rsgf_gamma, run, ss_stepsizes
from . import theory

__all__ = [
    "ConfigError",
    "EstimationError",
    "NoiseDominatedError",
    "NoiseKind",
    "NoiseModel",
    "NoisyOracle",
    "RngStream",
    "SolverAbortError",
    "gaussian_vector",
    "noisy_eval",
    "uniform_noise",
    "EstimateReport",
    "estimate_grad_var",
    "estimate_L1_saa",
    "estimate_sigma_additive",
    "estimate_sigma_relative",
    "AggregateSeries",
    "CellResult",
    "ExperimentConfig",
    "aggregate",
    "mean_final_accuracy",
    "run_experiment",
    "write_aggregate_csv",
    "write_trial_csv",
    "ProblemSpec",
    "f1_make",
    "sphere_make",
    "SolverConfig",
    "Trajectory",
    "rg_mu",
    "rsgf_gamma",
    "run",
    "ss_stepsizes",
    "theory",
    "__version__",
]

__version__ = "0.1.0"
