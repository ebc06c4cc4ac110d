"""Randomness contract, noise models, and the noisy evaluation oracle.

All randomness flows through :class:`RngStream`, a thin wrapper around
numpy's PCG64 generator seeded from ``(seed, stream_id)`` via
``SeedSequence``. Distinct stream ids give statistically independent
streams; the same ``(seed, stream_id)`` replays the exact same bit
sequence within one build. Gaussian draws use numpy's ziggurat
``standard_normal``; uniform draws use ``Generator.uniform``. Both fill
arrays element-by-element from the bit stream, so block draws and
repeated scalar draws produce identical sequences (relied on by the
compiled solver kernels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ConfigError",
    "EstimationError",
    "NoiseDominatedError",
    "SolverAbortError",
    "RngStream",
    "NoiseKind",
    "NoiseModel",
    "NoisyOracle",
    "gaussian_vector",
    "uniform_noise",
    "noisy_eval",
    "as_vector",
]

SQRT3 = math.sqrt(3.0)

# Reserved derivation tags for the per-trial stream tree.
DIRECTION_TAG = 0  # solver search directions
NOISE_TAG = 1      # oracle noise draws
ESTIMATOR_TAG = 2  # estimator probe directions


class ConfigError(ValueError):
    """A configuration violates a solver or noise-model assumption."""


class SolverAbortError(RuntimeError):
    """A solver produced a non-finite update; carries the partial trajectory."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class EstimationError(RuntimeError):
    """A parameter estimator failed to produce a finite estimate."""


class NoiseDominatedError(EstimationError):
    """Relative-noise estimation at a point where noise swamps the signal."""


class RngStream:
    """Deterministic random stream keyed by ``(seed, stream_id)``.

    ``derive(tag)`` returns an independent child stream; derivation is a
    pure function of ``(seed, stream_id, tags)``, so deriving the same tag
    twice replays the same child. Solvers draw directions from tag 0 and
    oracles draw noise from tag 1, which keeps the two sequences
    independent and lets the fast path pre-draw either one in blocks.
    """

    def __init__(self, seed: int, stream_id: int = 0, _tags: tuple[int, ...] = ()):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._tags = tuple(_tags)
        key = (self.stream_id, *self._tags)
        self._seq = np.random.SeedSequence(self.seed, spawn_key=key)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    def derive(self, tag: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self._tags + (int(tag),))

    def normals(self, n: int) -> np.ndarray:
        """n i.i.d. standard normal components."""
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        return self.generator.standard_normal(n)

    def uniform_symmetric(self, half_width: float) -> float:
        """One draw from U[-half_width, half_width)."""
        return float(self.generator.uniform(-half_width, half_width))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, tags={self._tags})"


def gaussian_vector(rng: RngStream, n: int) -> np.ndarray:
    """Standard Gaussian direction of dimension n (mean 0, covariance I)."""
    return rng.normals(n)


def uniform_noise(rng: RngStream, sigma: float) -> float:
    """Zero-mean uniform noise with standard deviation sigma.

    Drawn from U[-sqrt(3) sigma, sqrt(3) sigma], which has variance sigma^2.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return rng.uniform_symmetric(SQRT3 * sigma)


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Validate and return x as a finite float64 vector."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite components")
    return v


class NoiseKind(str, Enum):
    ADDITIVE = "add"
    MULTIPLICATIVE = "mult"


def _parse_kind(kind) -> NoiseKind:
    if isinstance(kind, NoiseKind):
        return kind
    try:
        return NoiseKind(str(kind))
    except ValueError:
        raise ConfigError(f"unknown noise kind {kind!r}; use 'add' or 'mult'") from None


@dataclass(frozen=True)
class NoiseModel:
    """Uniform noise law: additive f + nu, or multiplicative f (1 + nu).

    nu ~ U[-sqrt(3) sigma, sqrt(3) sigma] has mean 0 and variance sigma^2.
    The multiplicative case requires sigma < 3**-0.5 so the support bound
    a = sqrt(3) sigma stays below 1 and the noise can never reach -100%.
    """

    kind: NoiseKind
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "kind", _parse_kind(self.kind))
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.kind is NoiseKind.MULTIPLICATIVE and self.sigma >= 3 ** -0.5:
            raise ConfigError(
                f"multiplicative sigma must be < 3**-0.5 ~= 0.5774, got {self.sigma}"
            )

    @property
    def half_width(self) -> float:
        return SQRT3 * self.sigma

    def apply(self, f_value: float, nu: float) -> float:
        if self.kind is NoiseKind.ADDITIVE:
            return f_value + nu
        return f_value * (1.0 + nu)


class NoisyOracle:
    """The only gateway to noisy function values, with exact accounting.

    Every ``evaluate`` draws a fresh noise realization from this oracle's
    stream and increments ``eval_count`` by one. ``true_value`` is the
    noise-free probe used for trajectory logging; it touches neither the
    counter nor the stream. An oracle is single-threaded state: never share
    one between concurrent trials.
    """

    def __init__(self, problem, noise: NoiseModel, rng: RngStream):
        self.problem = problem
        self.noise = noise
        self.rng = rng
        self.eval_count = 0

    def evaluate(self, x) -> float:
        x = as_vector(x, self.problem.n)
        nu = self.rng.uniform_symmetric(self.noise.half_width)
        self.eval_count += 1
        return self.noise.apply(self.problem.eval(x), nu)

    def true_value(self, x) -> float:
        return self.problem.eval(np.asarray(x, dtype=float))

    # Fast-path hooks. A compiled kernel consumes noise pre-drawn in blocks
    # from the same stream (identical values to per-call draws) and reports
    # back how many evaluations it actually performed.
    def noise_block(self, shape) -> np.ndarray:
        return self.rng.generator.uniform(
            -self.noise.half_width, self.noise.half_width, size=shape
        )

    def add_evals(self, count: int) -> None:
        self.eval_count += int(count)


def noisy_eval(oracle: NoisyOracle, x) -> float:
    """Functional alias for ``oracle.evaluate(x)``."""
    return oracle.evaluate(x)
