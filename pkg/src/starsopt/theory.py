"""Closed-form stepsizes, constants, and accuracy/budget bounds.

Pure functions of the problem and noise parameters. Conventions:

  * sigma_a is the additive noise standard deviation, sigma_r the relative
    one, L0/L1 the function/gradient Lipschitz constants, n the dimension.
  * eps_pred is the smallest accuracy the convergence analysis can
    guarantee at a given noise level (the method's noise floor).
  * The iteration budget is the real-valued formula rounded up and floored
    at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "mu_star_additive",
    "fd_error_bound_additive",
    "step_length",
    "eps_pred_additive",
    "iteration_budget_additive",
    "c4",
    "mu_tilde",
    "snr_bound_uniform",
    "eps_pred_multiplicative",
    "allowed_sigma_r_squared",
    "constants_additive",
    "constants_multiplicative",
    "TheoryBounds",
    "additive_bounds",
    "multiplicative_bounds",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def _require_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value}")


def mu_star_additive(sigma_a: float, L1: float, n: int) -> float:
    """Noise-adjusted smoothing stepsize under additive noise.

    mu* = (8 sigma_a^2 n / (L1^2 (n+6)^3))^(1/4), the minimizer of the
    expected squared finite-difference error. Requires sigma_a > 0; with
    zero noise variance the noise-adjusted stepsize is undefined.
    """
    _require_positive(sigma_a=sigma_a, L1=L1, n=n)
    return (8.0 * sigma_a**2 * n / (L1**2 * (n + 6) ** 3)) ** 0.25


def fd_error_bound_additive(mu: float, sigma_a: float, L1: float, n: int) -> float:
    """Upper bound on the expected squared error of the one-directional
    forward-difference gradient surrogate at smoothing stepsize mu:

        (mu^2 L1^2 / 4)(n+6)^3 + (2 sigma_a^2 / mu^2) n.

    Minimized at mu = mu_star_additive, where both summands are equal and
    the value is sqrt(2) L1 sigma_a sqrt(n (n+6)^3).
    """
    _require_positive(mu=mu, sigma_a=sigma_a, L1=L1, n=n)
    return (mu**2 * L1**2 / 4.0) * (n + 6) ** 3 + (2.0 * sigma_a**2 / mu**2) * n


def step_length(L1: float, n: int) -> float:
    """Fixed iterate step length h = 1 / (4 L1 (n+4))."""
    _require_positive(L1=L1)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return 1.0 / (4.0 * L1 * (n + 4))


def eps_pred_additive(sigma_a: float, n: int) -> float:
    """Accuracy floor under additive noise: (6 sqrt(2) / 5) sigma_a (n+4)."""
    _require_positive(sigma_a=sigma_a, n=n)
    return 6.0 * SQRT2 / 5.0 * sigma_a * (n + 4)


def iteration_budget_additive(n: int, L1: float, R2: float, eps: float) -> int:
    """Iterations needed for accuracy eps: ceil(8 (n+4) L1 R^2 / eps - 1),
    floored at zero."""
    _require_positive(n=n, L1=L1, R2=R2, eps=eps)
    value = 8.0 * (n + 4) * L1 * R2 / eps - 1.0
    return max(0, math.ceil(value))


def c4(sigma_r: float, L1: float, n: int) -> float:
    """Coefficient of the dynamic smoothing stepsize under relative noise:

        C4 = (16 sigma_r^2 n / (L1^2 (1 + 3 sigma_r^2) (n+6)^3))^(1/4),

    used as mu = C4 sqrt(|f~(x)|). Requires 0 < sigma_r < 3**-0.5.
    """
    _require_positive(sigma_r=sigma_r, L1=L1, n=n)
    if sigma_r >= 3 ** -0.5:
        raise ValueError(f"sigma_r must be < 3**-0.5, got {sigma_r}")
    return (
        16.0 * sigma_r**2 * n / (L1**2 * (1.0 + 3.0 * sigma_r**2) * (n + 6) ** 3)
    ) ** 0.25


def mu_tilde(c4_value: float, f_noisy: float, mu_min: float) -> float:
    """Dynamic smoothing stepsize max(C4 sqrt(|f_noisy|), mu_min).

    The floor keeps the forward-difference quotient finite when the noisy
    value vanishes (e.g. at a root of f).
    """
    _require_positive(c4_value=c4_value)
    return max(c4_value * math.sqrt(abs(f_noisy)), mu_min)


def snr_bound_uniform(sigma_r: float) -> float:
    """Exact bound b = E[1/(1+nu)] for uniform nu on [-a, a], a = sqrt(3) sigma_r.

    b = ln((1+a)/(1-a)) / (2a), with b = 1 at sigma_r = 0. Finite only while
    a < 1, i.e. sigma_r < 3**-0.5.
    """
    if sigma_r < 0 or sigma_r >= 3 ** -0.5:
        raise ValueError(f"sigma_r must be in [0, 3**-0.5), got {sigma_r}")
    if sigma_r == 0:
        return 1.0
    a = SQRT3 * sigma_r
    return math.log((1.0 + a) / (1.0 - a)) / (2.0 * a)


def eps_pred_multiplicative(
    sigma_r: float, n: int, b: float, M: float, L0: float, L1: float
) -> float:
    """Accuracy floor under relative noise: C9 (sigma_r^2 + 1/6)(n+4), with

        C9 = (3 sqrt(3) / 8)(2b + 7) M + 3 L0^2 / (2 L1).

    M is an upper bound on the average of the historical absolute true
    function values along the run. The additive 1/6 term makes this floor
    large even for vanishing noise; callers should report it verbatim
    rather than clamp it.
    """
    _require_positive(n=n, b=b, M=M, L0=L0, L1=L1)
    if sigma_r < 0:
        raise ValueError(f"sigma_r must be >= 0, got {sigma_r}")
    c9 = 3.0 * SQRT3 / 8.0 * (2.0 * b + 7.0) * M + 3.0 * L0**2 / (2.0 * L1)
    return c9 * (sigma_r**2 + 1.0 / 6.0) * (n + 4)


def allowed_sigma_r_squared(
    eps: float, n: int, b: float, M: float, L0: float, L1: float
) -> float:
    """Largest relative-noise variance for which accuracy eps is guaranteed:

        sigma_r^2 <= eps / (C9 (n+4)) - 1/6.

    Returned verbatim; a non-positive value flags that no noise level
    attains the requested accuracy (the additive 1/6 term is the limiting
    factor for small eps).
    """
    _require_positive(eps=eps, n=n, b=b, M=M, L0=L0, L1=L1)
    c9 = 3.0 * SQRT3 / 8.0 * (2.0 * b + 7.0) * M + 3.0 * L0**2 / (2.0 * L1)
    return eps / (c9 * (n + 4)) - 1.0 / 6.0


def constants_additive(sigma_a: float, L1: float, n: int) -> dict[str, float]:
    """Convergence constants for the additive analysis.

    C1 bounds the expected squared finite-difference error at mu*, C2 = 2 C1
    bounds the second moment of the gradient surrogate (noise part), and C3
    is the per-step additive error term bound 3 sqrt(2) sigma_a / (20 L1).
    """
    _require_positive(sigma_a=sigma_a, L1=L1, n=n)
    c1 = SQRT2 * L1 * sigma_a * math.sqrt(n * (n + 6) ** 3)
    return {
        "C1": c1,
        "C2": 2.0 * c1,
        "C3": 3.0 * SQRT2 * sigma_a / (20.0 * L1),
    }


def constants_multiplicative(
    sigma_r: float, b: float, L0: float, L1: float, n: int
) -> dict[str, float]:
    """Convergence constants for the relative-noise analysis.

    C5 and C6 bound the second moment of the gradient surrogate through
    E||s||^2 <= 2(n+4)||grad f||^2 + C5 |f| + C6; C7 and C8 are their
    step-normalized forms entering the accuracy floor. C8 simplifies to
    3 L0^2 sigma_r^2 / (16 L1^2) independently of n.
    """
    _require_positive(b=b, L0=L0, L1=L1, n=n)
    c4_value = c4(sigma_r, L1, n)
    growth = math.sqrt((1.0 + 3.0 * sigma_r**2) * n * (n + 6) ** 3)
    c5 = 0.5 * c4_value**2 * L1**2 * (n + 6) ** 3 + (1.0 + b) * L1 * sigma_r * growth
    c6 = 3.0 * L0**2 * sigma_r**2 * (n + 4) ** 2
    c7 = c4_value**2 * n / (4.0 * (n + 4)) + c5 / (16.0 * L1**2 * (n + 4) ** 2)
    c8 = c6 / (16.0 * L1**2 * (n + 4) ** 2)
    return {"C4": c4_value, "C5": c5, "C6": c6, "C7": c7, "C8": c8}


@dataclass(frozen=True)
class TheoryBounds:
    """Bundle of stepsizes, floors, and budgets for a (problem, noise) pair."""

    noise_kind: str
    h: float
    eps_pred: float
    N: int
    mu_star: float | None = None
    c4: float | None = None
    constants: dict[str, float] = field(default_factory=dict)

    def as_record(self) -> str:
        """Single-line machine-readable key=value rendering."""
        items: list[tuple[str, object]] = [("noise", self.noise_kind)]
        if self.mu_star is not None:
            items.append(("mu_star", self.mu_star))
        if self.c4 is not None:
            items.append(("c4", self.c4))
        items += [("h", self.h), ("eps_pred", self.eps_pred), ("N", self.N)]
        items += sorted(self.constants.items())
        return " ".join(
            f"{k}={v if isinstance(v, (str, int)) else repr(float(v))}"
            for k, v in items
        )


def additive_bounds(sigma_a: float, L1: float, n: int, R2: float) -> TheoryBounds:
    """All additive-noise quantities, with N sized for eps = eps_pred."""
    eps = eps_pred_additive(sigma_a, n)
    return TheoryBounds(
        noise_kind="add",
        h=step_length(L1, n),
        eps_pred=eps,
        N=iteration_budget_additive(n, L1, R2, eps),
        mu_star=mu_star_additive(sigma_a, L1, n),
        constants=constants_additive(sigma_a, L1, n),
    )


def multiplicative_bounds(
    sigma_r: float, L0: float, L1: float, n: int, R2: float, M: float
) -> TheoryBounds:
    """All relative-noise quantities for a given historical-mean bound M.

    M is not known a priori; pass a post-hoc value from a completed run, or
    an a-priori proxy such as max(|f(x0)|, |f*|). N is sized by the additive
    budget formula at eps = eps_pred, since no closed-form budget exists for
    the relative case.
    """
    b = snr_bound_uniform(sigma_r)
    eps = eps_pred_multiplicative(sigma_r, n, b, M, L0, L1)
    consts = constants_multiplicative(sigma_r, b, L0, L1, n)
    consts["b"] = b
    consts["M"] = M
    c9 = 3.0 * SQRT3 / 8.0 * (2.0 * b + 7.0) * M + 3.0 * L0**2 / (2.0 * L1)
    consts["C9"] = c9
    return TheoryBounds(
        noise_kind="mult",
        h=step_length(L1, n),
        eps_pred=eps,
        N=iteration_budget_additive(n, L1, R2, eps),
        c4=consts["C4"],
        constants=consts,
    )
