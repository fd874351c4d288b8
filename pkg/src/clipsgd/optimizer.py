"""Clipped streaming SGD: clip operator, 1/(tau_l (t+gamma)) schedule, run loop.

One sample per update, O(dim) state. A missing clip level means vanilla SGD.
Regularized baselines (ridge, lasso, Huber) ride the identical schedule: the
ridge/lasso subgradient is added to the sample gradient before clipping, and
the Huber variant replaces the regression residual by its threshold-clamped
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .models import KIND_REGRESSION, LossModel, project

REG_NONE = "none"
REG_RIDGE = "ridge"
REG_LASSO = "lasso"
REG_HUBER = "huber"


class StreamExhausted(RuntimeError):
    """Raised when the sample stream ends before the requested step count."""


def clip(g: np.ndarray, level: float) -> np.ndarray:
    """Rescale g to norm at most ``level``, preserving direction.

    clip(g, level) = min(1, level / ||g||) g, with clip(0, level) = 0 closing
    the 0/0 case. level = 0 freezes the iterate (degenerate but well defined).
    """
    if level < 0.0:
        raise ValueError(f"clip level must be nonnegative, got {level}")
    norm = math.sqrt(float(g @ g))
    if norm <= level or norm == 0.0:
        return g
    return g * (level / norm)


@dataclass(frozen=True)
class StepSchedule:
    """eta_t = 1 / (tau_l (t + gamma)) for t = 1, 2, ...; strictly decreasing."""

    tau_l: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.tau_l <= 0.0:
            raise ValueError(f"tau_l must be positive, got {self.tau_l}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")

    def eta(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"steps are 1-based, got t={t}")
        return 1.0 / (self.tau_l * (t + self.gamma))


@dataclass(frozen=True)
class Regularizer:
    """Additive ridge/lasso subgradient, or Huber residual clamping.

    ``weight`` is the regularization factor for ridge/lasso and the clamping
    threshold for Huber (which has no separate weight).
    """

    kind: str
    weight: float

    def __post_init__(self):
        if self.kind not in (REG_RIDGE, REG_LASSO, REG_HUBER):
            raise ValueError(f"unknown regularizer kind: {self.kind!r}")
        if self.weight < 0.0:
            raise ValueError(f"regularizer weight must be nonnegative, got {self.weight}")


def regularizer_grad(reg: Regularizer, theta: np.ndarray) -> np.ndarray:
    """Subgradient of the ridge/lasso penalty at theta (sign(0) taken as 0)."""
    if reg.kind == REG_RIDGE:
        return reg.weight * theta
    if reg.kind == REG_LASSO:
        return reg.weight * np.sign(theta)
    raise ValueError("huber is not an additive penalty; it clamps the regression residual")


@dataclass(frozen=True)
class OptimizerConfig:
    """Everything defining one streaming run except the model and the samples.

    ``clip_level`` None selects vanilla SGD (no float-infinity sentinel).
    ``init_param`` None falls back to the model's task-convention initializer.
    """

    schedule: StepSchedule
    clip_level: Optional[float] = None
    regularizer: Optional[Regularizer] = None
    init_param: Optional[np.ndarray] = None
    record_trajectory: bool = False

    def __post_init__(self):
        if self.clip_level is not None and self.clip_level < 0.0:
            raise ValueError(f"clip level must be nonnegative, got {self.clip_level}")


@dataclass(frozen=True)
class RunResult:
    final_param: np.ndarray
    samples_consumed: int
    l2_error_trajectory: Optional[np.ndarray] = None


def _effective_grad(model: LossModel, config: OptimizerConfig, theta: np.ndarray, sample):
    reg = config.regularizer
    if reg is not None and reg.kind == REG_HUBER:
        if model.kind != KIND_REGRESSION:
            raise ValueError("huber regularization applies only to regression models")
        x, y = sample
        resid = y - float(x @ theta)
        resid = max(-reg.weight, min(reg.weight, resid))
        return -resid * x
    g = model.grad(theta, sample)
    if reg is not None:
        g = g + regularizer_grad(reg, theta)
    return g


def run(model: LossModel, config: OptimizerConfig, stream: Iterator, n: int) -> RunResult:
    """Run exactly ``n`` streaming updates and return the final iterate.

    Each step pulls one sample, forms the (regularized) stochastic gradient,
    clips it when a clip level is set, takes the scheduled step, and projects
    onto the model domain. The optional trajectory records the l2 distance to
    the true parameter at every iterate including the initial one (length
    n + 1).
    """
    if n < 1:
        raise ValueError(f"need at least one step, got n={n}")
    theta = np.array(
        config.init_param if config.init_param is not None else model.default_init,
        dtype=np.float64,
    )
    if theta.shape != (model.dim,):
        raise ValueError(f"init_param must have shape ({model.dim},), got {theta.shape}")
    theta = project(model.domain, theta)

    traj = None
    if config.record_trajectory:
        traj = np.empty(n + 1)
        traj[0] = float(np.linalg.norm(theta - model.true_param))

    it = iter(stream)
    for t in range(1, n + 1):
        try:
            sample = next(it)
        except StopIteration:
            raise StreamExhausted(
                f"stream exhausted after {t - 1} samples; {n} requested"
            ) from None
        g = _effective_grad(model, config, theta, sample)
        if config.clip_level is not None:
            g = clip(g, config.clip_level)
            assert float(g @ g) <= config.clip_level**2 * (1.0 + 1e-12)
        theta = project(model.domain, theta - config.schedule.eta(t) * g)
        if model.domain.is_ball:
            assert np.linalg.norm(theta - model.domain.center) <= model.domain.radius * (1.0 + 1e-12)
        if traj is not None:
            traj[t] = float(np.linalg.norm(theta - model.true_param))

    return RunResult(final_param=theta, samples_consumed=n, l2_error_trajectory=traj)
