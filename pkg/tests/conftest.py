import numpy as np
import pytest

from starsopt import NoiseModel, NoisyOracle, RngStream, f1_make, sphere_make


@pytest.fixture
def f1_8():
    return f1_make(8)


@pytest.fixture
def sphere_8():
    return sphere_make(8)


def make_oracle(problem, kind="add", sigma=1e-3, seed=0, stream_id=0):
    return NoisyOracle(problem, NoiseModel(kind, sigma), RngStream(seed, stream_id).derive(1))


class StubRng:
    """Direction stream stub yielding scripted vectors."""

    def __init__(self, vectors):
        self.vectors = [np.asarray(v, dtype=float) for v in vectors]
        self.calls = 0

    def normals(self, n):
        v = self.vectors[self.calls % len(self.vectors)]
        self.calls += 1
        assert len(v) == n
        return v.copy()


class ScriptedOracle:
    """Oracle stub returning scripted noisy values, with real accounting."""

    def __init__(self, problem, values):
        self.problem = problem
        self.values = list(values)
        self.eval_count = 0

    def evaluate(self, x):
        value = self.values[self.eval_count]
        self.eval_count += 1
        return value

    def true_value(self, x):
        return self.problem.eval(x)
