"""Loss models: per-sample gradients, population risk, domains, regularity constants.

Each model bundles everything the optimizer and the verification tools need:
the stochastic gradient, the per-sample loss used for sequential validation,
the analytic population gradient and excess risk where they exist (the true
parameter is known in these synthetic tasks), the strong-convexity and
smoothness constants, and the gradient-noise variance envelope

    E ||grad(theta, x) - grad_risk(theta)||^2 <= alpha ||theta - theta*||^2 + beta.

Models are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import (
    PURPOSE_ESTIMATION,
    LogisticTaskSpec,
    MeanTaskSpec,
    ParetoSpec,
    RegressionTaskSpec,
    logistic_sample_block,
    mean_sample_block,
    pareto_standardized,
    regression_sample_block,
    stream,
)

KIND_MEAN = "mean"
KIND_REGRESSION = "regression"
KIND_LOGISTIC = "logistic"


@dataclass(frozen=True)
class RegularityConstants:
    """Curvature and gradient-noise constants of a population risk."""

    tau_l: float
    tau_u: float
    alpha: float
    beta: float
    c4: Optional[float] = None

    def __post_init__(self):
        if self.tau_l <= 0.0:
            raise ValueError(f"tau_l must be positive, got {self.tau_l}")
        if self.tau_u < self.tau_l:
            raise ValueError(f"tau_u must be >= tau_l, got {self.tau_u} < {self.tau_l}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")


@dataclass(frozen=True)
class Domain:
    """Either all of R^p or a Euclidean ball; radius None means unconstrained."""

    center: Optional[np.ndarray] = None
    radius: Optional[float] = None

    def __post_init__(self):
        if (self.center is None) != (self.radius is None):
            raise ValueError("ball domain needs both center and radius")
        if self.center is not None:
            c = np.asarray(self.center, dtype=np.float64)
            object.__setattr__(self, "center", c)
            if self.radius <= 0.0:
                raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def is_ball(self) -> bool:
        return self.center is not None

    @staticmethod
    def unconstrained() -> "Domain":
        return Domain()

    @staticmethod
    def ball(center, radius: float) -> "Domain":
        return Domain(np.asarray(center, dtype=np.float64), float(radius))


def project(domain: Domain, theta: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the domain (identity on interior points)."""
    if not domain.is_ball:
        return theta
    diff = theta - domain.center
    dist = math.sqrt(float(diff @ diff))
    if dist <= domain.radius:
        return theta
    return domain.center + diff * (domain.radius / dist)


@dataclass(frozen=True)
class LossModel:
    """Per-sample loss/gradient plus the population-level quantities of a task.

    ``grad``/``loss`` take (theta, sample). ``grad_block``/``loss_block`` take
    (theta, block) where ``block`` is the stacked output of ``draw_block``.
    ``population_grad`` and ``risk_gap`` are None when no closed form exists
    (logistic regression over heavy-tailed covariates).
    """

    kind: str
    dim: int
    grad: Callable
    loss: Callable
    constants: RegularityConstants
    domain: Domain
    true_param: np.ndarray
    default_init: np.ndarray
    population_grad: Optional[Callable] = None
    risk_gap: Optional[Callable] = None
    draw_block: Optional[Callable] = None
    grad_block: Optional[Callable] = None
    loss_block: Optional[Callable] = None
    spec: object = None


def mean_model(spec: MeanTaskSpec) -> LossModel:
    """Squared-loss mean estimation: grad(theta, x) = theta - x.

    tau_l = tau_u = 1, alpha = 0, beta = trace of the sample covariance
    (= dim under unit-variance standardization).
    """
    mu = spec.true_mean
    p = spec.dim
    trace_sigma = float(p) * spec.pareto.std**2

    return LossModel(
        kind=KIND_MEAN,
        dim=p,
        grad=lambda theta, x: theta - x,
        loss=lambda theta, x: 0.5 * float(np.sum((x - theta) ** 2)),
        constants=RegularityConstants(1.0, 1.0, 0.0, trace_sigma),
        domain=Domain.unconstrained(),
        true_param=mu,
        default_init=np.full(p, 1.0 / math.sqrt(p)) + mu,
        population_grad=lambda theta: theta - mu,
        risk_gap=lambda theta: 0.5 * float(np.sum((theta - mu) ** 2)),
        draw_block=lambda rng, n: mean_sample_block(spec, rng, n),
        grad_block=lambda theta, x: theta[None, :] - x,
        loss_block=lambda theta, x: 0.5 * np.sum((x - theta[None, :]) ** 2, axis=1),
        spec=spec,
    )


def estimate_fourth_moment_ratio(beta: float, n_draws: int = 200_000,
                                 rng: Optional[np.random.Generator] = None) -> float:
    """Monte-Carlo estimate of sup_v E<z,v>^4 / (E<z,v>^2)^2 for i.i.d. coordinates.

    With independent identically distributed coordinates the supremum over
    unit directions is attained at a coordinate axis, so a single marginal
    stream suffices. The estimator is noisy for tails just above 4 (the 8th
    moment diverges); it feeds only the deliberately conservative
    theory-driven schedule.
    """
    if rng is None:
        rng = stream(0, 0, PURPOSE_ESTIMATION)
    z = pareto_standardized(ParetoSpec(beta), rng, size=n_draws)
    m2 = float(np.mean(z**2))
    m4 = float(np.mean(z**4))
    return m4 / m2**2


def regression_model(spec: RegressionTaskSpec, c4: Optional[float] = None,
                     rng: Optional[np.random.Generator] = None) -> LossModel:
    """Squared-loss linear regression: grad(theta, (x, y)) = -(y - <x, theta>) x.

    With standardized covariates the covariance is the identity, so
    tau_l = tau_u = 1, alpha = 2 p (C4 + 1), beta = p sigma^2. C4 is the
    fourth-moment ratio of the covariate marginal, estimated by Monte Carlo
    once per spec unless supplied.
    """
    theta_star = spec.true_param
    p = spec.dim
    if c4 is None:
        c4 = estimate_fourth_moment_ratio(spec.beta_x, rng=rng)
    tau = 1.0  # lambda_min(Sigma) = lambda_max(Sigma) = 1 under standardization
    constants = RegularityConstants(
        tau_l=tau,
        tau_u=tau,
        alpha=2.0 * p * (c4 + 1.0) * tau**2,
        beta=p * spec.sigma2 * tau,
        c4=c4,
    )

    def grad(theta, sample):
        x, y = sample
        return (float(x @ theta) - y) * x

    def loss(theta, sample):
        x, y = sample
        return 0.5 * (y - float(x @ theta)) ** 2

    return LossModel(
        kind=KIND_REGRESSION,
        dim=p,
        grad=grad,
        loss=loss,
        constants=constants,
        domain=Domain.unconstrained(),
        true_param=theta_star,
        default_init=np.zeros(p),
        population_grad=lambda theta: theta - theta_star,
        risk_gap=lambda theta: 0.5 * float(np.sum((theta - theta_star) ** 2)),
        draw_block=lambda rng_, n: regression_sample_block(spec, rng_, n),
        grad_block=lambda theta, b: (b[0] @ theta - b[1])[:, None] * b[0],
        loss_block=lambda theta, b: 0.5 * (b[1] - b[0] @ theta) ** 2,
        spec=spec,
    )


def _stable_sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_model(spec: LogisticTaskSpec, tau_l: float = 0.1) -> LossModel:
    """Negative log-likelihood logistic regression on a ball around theta*.

    The per-sample loss is -y <x, theta> + log(1 + exp(<x, theta>)); its
    gradient is (sigmoid(<x, theta>) - y) x, the descent direction. The
    population Hessian degenerates far from the origin, so the domain is a
    ball of the spec's radius centered at the true parameter; the effective
    strong-convexity constant on that ball is configurable (default 0.1).
    Smoothness uses the 1/4 sigmoid-slope bound, and the noise envelope the
    bounded score |sigmoid - y| <= 1, giving alpha = 0, beta = dim.
    """
    theta_star = spec.true_param
    p = spec.dim

    def grad(theta, sample):
        x, y = sample
        s = float(_stable_sigmoid(float(x @ theta)))
        return (s - y) * x

    def loss(theta, sample):
        x, y = sample
        z = float(x @ theta)
        return -y * z + float(np.logaddexp(0.0, z))

    return LossModel(
        kind=KIND_LOGISTIC,
        dim=p,
        grad=grad,
        loss=loss,
        constants=RegularityConstants(tau_l, 0.25, 0.0, float(p)),
        domain=Domain.ball(theta_star, spec.radius),
        true_param=theta_star,
        default_init=0.75 * theta_star,
        draw_block=lambda rng_, n: logistic_sample_block(spec, rng_, n),
        grad_block=lambda theta, b: (_stable_sigmoid(b[0] @ theta) - b[1])[:, None] * b[0],
        loss_block=lambda theta, b: -b[1] * (b[0] @ theta) + np.logaddexp(0.0, b[0] @ theta),
        spec=spec,
    )
