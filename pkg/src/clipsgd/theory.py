"""Closed-form schedule/clip-level prescriptions, error bounds, and verifiers.

The general prescription for a tau_l-strongly-convex, tau_u-smooth risk with
gradient-noise envelope (alpha, beta) and confidence delta in (0, 2/e):

    gamma = 144 max(tau_u / tau_l, 96 alpha / tau_l^2) log(2/delta) + 1
    eta_t = 1 / (tau_l (t + gamma))
    level = c1 sqrt( tau_l^2 gamma (gamma - 1) r1^2 / log(2/delta)^2
                     + (N + gamma) beta / log(2/delta) )

with r1 the initial l2 error, c1 >= 1 a user scaling constant, and the
high-probability final-error bound

    100 c1 ( gamma r1 / (N + gamma)
             + sqrt(beta log(2/delta) / (N + gamma)) / tau_l ).

Specializations: mean estimation (tau = 1, alpha = 0, beta = trace of the
covariance) and linear regression (alpha = 2 p (C4 + 1) tau_u^2,
beta = p sigma^2 tau_u, with C4 the covariate fourth-moment ratio).

The module also hosts empirical verifiers: Monte-Carlo statistics of the
clipped-gradient noise (bias/variance split) and a coin-martingale crossing
simulator checked against the Freedman exponential bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .models import LossModel, RegularityConstants
from .optimizer import StepSchedule

DELTA_MAX = 2.0 * math.exp(-1.0)


@dataclass(frozen=True)
class HyperparamInputs:
    """Inputs to the prescribed-hyperparameter formulas."""

    constants: RegularityConstants
    n: int
    delta: float
    init_error: float
    c1: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < DELTA_MAX:
            raise ValueError(f"delta must lie in (0, 2/e), got {self.delta}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.c1 < 1.0:
            raise ValueError(f"c1 must be >= 1, got {self.c1}")
        if self.init_error < 0.0:
            raise ValueError(f"init_error must be >= 0, got {self.init_error}")


@dataclass(frozen=True)
class PrescribedHyperparams:
    gamma: float
    schedule: StepSchedule
    clip_level: float
    error_bound: float


def prescribed_hyperparams(inputs: HyperparamInputs) -> PrescribedHyperparams:
    """Delay, schedule, clip level, and error bound for the general case."""
    c = inputs.constants
    log_term = math.log(2.0 / inputs.delta)
    gamma = 144.0 * max(c.tau_u / c.tau_l, 96.0 * c.alpha / c.tau_l**2) * log_term + 1.0
    level = inputs.c1 * math.sqrt(
        c.tau_l**2 * gamma * (gamma - 1.0) * inputs.init_error**2 / log_term**2
        + (inputs.n + gamma) * c.beta / log_term
    )
    bound = 100.0 * inputs.c1 * (
        gamma * inputs.init_error / (inputs.n + gamma)
        + math.sqrt(c.beta * log_term / (inputs.n + gamma)) / c.tau_l
    )
    return PrescribedHyperparams(
        gamma=gamma,
        schedule=StepSchedule(tau_l=c.tau_l, gamma=gamma),
        clip_level=level,
        error_bound=bound,
    )


def mean_estimation_hyperparams(trace_sigma: float, n: int, delta: float,
                                init_error: float, c1: float = 1.0) -> PrescribedHyperparams:
    """Mean-estimation specialization: tau = 1, alpha = 0, beta = trace_sigma,
    so gamma = 144 log(2/delta) + 1 and eta_t = 1/(t + gamma)."""
    constants = RegularityConstants(1.0, 1.0, 0.0, trace_sigma)
    return prescribed_hyperparams(HyperparamInputs(constants, n, delta, init_error, c1))


def regression_hyperparams(constants: RegularityConstants, p: int, sigma2: float,
                           n: int, delta: float, init_error: float,
                           c1: float = 1.0) -> PrescribedHyperparams:
    """Regression specialization via alpha = 2 p (C4+1) tau_u^2, beta = p sigma^2 tau_u.

    Requires the covariate fourth-moment ratio C4 on ``constants``. The
    resulting delay gamma = 144 max(tau_u/tau_l, 192 (C4+1) p tau_u^2 /
    tau_l^2) log(2/delta) + 1 is deliberately conservative.
    """
    if constants.c4 is None:
        raise ValueError("regression prescription needs the fourth-moment ratio c4")
    derived = RegularityConstants(
        tau_l=constants.tau_l,
        tau_u=constants.tau_u,
        alpha=2.0 * p * (constants.c4 + 1.0) * constants.tau_u**2,
        beta=p * sigma2 * constants.tau_u,
        c4=constants.c4,
    )
    return prescribed_hyperparams(HyperparamInputs(derived, n, delta, init_error, c1))


def sample_complexity(tau_l: float, tau_u: float, sigma2: float, r0: float,
                      eps: float, delta: float) -> float:
    """Samples needed for an eps-accurate excess risk, up to constants.

    max( sqrt(tau_u^3 r0 / (tau_l^3 eps)), tau_u sigma2 / (tau_l^2 eps) )
    * log(1/delta), with leading constant 1: the asymptotic statement hides
    constants, so only the scaling structure is meaningful.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if r0 < 0.0:
        raise ValueError(f"r0 must be >= 0, got {r0}")
    init_term = math.sqrt(tau_u**3 * r0 / (tau_l**3 * eps))
    noise_term = tau_u * sigma2 / (tau_l**2 * eps)
    return max(init_term, noise_term) * math.log(1.0 / delta)


def freedman_bound(a: float, v: float, b: float) -> float:
    """exp(-a^2 / (2 (v + b a))): martingale crossing probability bound.

    Bounds P(exists s <= T with partial sum >= a and accumulated conditional
    variance <= v), for difference sequences uniformly bounded by b.
    """
    if a <= 0.0 or v <= 0.0:
        raise ValueError(f"a and v must be positive, got a={a}, v={v}")
    if b < 0.0:
        raise ValueError(f"b must be >= 0, got {b}")
    return math.exp(-(a**2) / (2.0 * (v + b * a)))


@dataclass(frozen=True)
class ClipNoiseStats:
    """Monte-Carlo statistics of eps = grad_risk(theta) - clip(grad(theta, x), level)."""

    bias_norm: float
    var_mean: float
    v_norm_max: float


def clip_noise_stats(model: LossModel, theta: np.ndarray, level: float,
                     n_mc: int, rng: np.random.Generator,
                     block: int = 20_000) -> ClipNoiseStats:
    """Estimate the bias norm, centered second moment, and max centered norm
    of the clipped-gradient noise at ``theta``.

    The mean of eps is estimated from the same draw set (plug-in, bias
    O(1/n_mc)). The centered part always satisfies ||eps - mean|| <= 2 level
    since both clip(grad) and its average lie in the level-ball.
    """
    if n_mc < 10_000:
        raise ValueError(f"need at least 1e4 draws for stable estimates, got {n_mc}")
    if model.population_grad is None or model.draw_block is None or model.grad_block is None:
        raise ValueError("model must expose population_grad and block sampling")
    pop = model.population_grad(theta)

    eps = np.empty((n_mc, model.dim))
    done = 0
    while done < n_mc:
        m = min(block, n_mc - done)
        samples = model.draw_block(rng, m)
        g = model.grad_block(theta, samples)
        norms = np.sqrt(np.einsum("ij,ij->i", g, g))
        scale = np.ones(m)
        over = norms > level
        scale[over] = level / norms[over]
        eps[done : done + m] = pop[None, :] - g * scale[:, None]
        done += m

    mean_eps = eps.mean(axis=0)
    centered = eps - mean_eps[None, :]
    cnorms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    return ClipNoiseStats(
        bias_norm=float(np.linalg.norm(mean_eps)),
        var_mean=float(np.mean(cnorms**2)),
        v_norm_max=float(cnorms.max()),
    )


def coin_crossing_probability(a: float, v: float, b: float, t_max: int,
                              runs: int, rng: np.random.Generator,
                              chunk: int = 5_000) -> float:
    """Empirical P(exists s <= t_max: partial sum >= a and s b^2 <= v) for a
    fair +-b coin martingale; to be compared against freedman_bound(a, v, b)."""
    if t_max < 1 or runs < 1:
        raise ValueError("t_max and runs must be positive")
    s_cap = min(t_max, int(math.floor(v / b**2))) if b > 0.0 else t_max
    if s_cap < 1:
        return 0.0
    hits = 0
    done = 0
    while done < runs:
        m = min(chunk, runs - done)
        steps = (rng.integers(0, 2, size=(m, s_cap)).astype(np.float64) * 2.0 - 1.0) * b
        peaks = np.cumsum(steps, axis=1).max(axis=1)
        hits += int((peaks >= a).sum())
        done += m
    return hits / runs
