"""Sequential-validation hyperparameter selection on a single stream.

All candidates run in lockstep over the identical sample sequence (memory
O(m * dim), one pass). During the final ceil(q * n) steps, each incoming
sample scores every candidate's current iterate *before* that sample is used
for the updates, so evaluation never sees its own training effect. The winner
minimizes the mean held-out loss; ties break to the smallest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .models import LossModel, project
from .optimizer import (
    OptimizerConfig,
    Regularizer,
    StepSchedule,
    StreamExhausted,
    _effective_grad,
    clip,
)

PARAM_CLIP = "clip_level"
PARAM_DELAY = "delay"
PARAM_REG_WEIGHT = "reg_weight"

_PARAMETERS = (PARAM_CLIP, PARAM_DELAY, PARAM_REG_WEIGHT)


@dataclass(frozen=True)
class CandidateGrid:
    parameter: str
    values: tuple
    q: float = 0.2

    def __post_init__(self):
        if self.parameter not in _PARAMETERS:
            raise ValueError(f"unknown parameter {self.parameter!r}; expected one of {_PARAMETERS}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("candidate grid must be nonempty")
        object.__setattr__(self, "values", vals)
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"validation fraction q must lie in (0, 1), got {self.q}")


@dataclass(frozen=True)
class SelectionResult:
    winner_index: int
    scores: tuple


def apply_candidate(config: OptimizerConfig, parameter: str, value: float) -> OptimizerConfig:
    """Config with one hyperparameter replaced by a candidate value."""
    if parameter == PARAM_CLIP:
        return replace(config, clip_level=value)
    if parameter == PARAM_DELAY:
        return replace(config, schedule=StepSchedule(config.schedule.tau_l, value))
    if parameter == PARAM_REG_WEIGHT:
        if config.regularizer is None:
            raise ValueError("reg_weight grid needs a base config with a regularizer")
        return replace(config, regularizer=Regularizer(config.regularizer.kind, value))
    raise ValueError(f"unknown parameter {parameter!r}")


def candidate_configs(base: OptimizerConfig, grids: Sequence[CandidateGrid]) -> list[OptimizerConfig]:
    """Product grid of candidate configs (order: last grid varies fastest)."""
    configs = []
    for combo in product(*(g.values for g in grids)):
        cfg = base
        for grid, value in zip(grids, combo):
            cfg = apply_candidate(cfg, grid.parameter, value)
        configs.append(cfg)
    return configs


def validate_configs(model: LossModel, configs: Sequence[OptimizerConfig],
                     stream: Iterator, n: int, q: float = 0.2) -> SelectionResult:
    """Lockstep sequential validation of explicit candidate configs."""
    m = len(configs)
    if m == 0:
        raise ValueError("need at least one candidate")
    if not 0.0 < q < 1.0:
        raise ValueError(f"validation fraction q must lie in (0, 1), got {q}")
    window = math.ceil(q * n)
    if window < 1:
        raise ValueError(f"validation window is empty for q={q}, n={n}")

    thetas = []
    for cfg in configs:
        theta = np.array(
            cfg.init_param if cfg.init_param is not None else model.default_init,
            dtype=np.float64,
        )
        thetas.append(project(model.domain, theta))
    scores = np.zeros(m)

    it = iter(stream)
    for t in range(1, n + 1):
        try:
            sample = next(it)
        except StopIteration:
            raise StreamExhausted(
                f"stream exhausted after {t - 1} samples; {n} requested"
            ) from None
        if t > n - window:
            for j in range(m):
                scores[j] += model.loss(thetas[j], sample)
        for j, cfg in enumerate(configs):
            g = _effective_grad(model, cfg, thetas[j], sample)
            if cfg.clip_level is not None:
                g = clip(g, cfg.clip_level)
            thetas[j] = project(model.domain, thetas[j] - cfg.schedule.eta(t) * g)

    scores /= window
    return SelectionResult(winner_index=int(np.argmin(scores)), scores=tuple(scores))


def sequential_validate(model: LossModel, base_config: OptimizerConfig,
                        grid: CandidateGrid, stream: Iterator, n: int) -> SelectionResult:
    """Tune a single hyperparameter over its candidate grid."""
    configs = candidate_configs(base_config, [grid])
    return validate_configs(model, configs, stream, n, q=grid.q)


def _arith_grid(start: float, stop: float, step: float) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


def default_grids(task: str, n: int, p: int, q: float = 0.2) -> list[CandidateGrid]:
    """Standard candidate grids, scaled by sqrt(n p).

    Clip level: c sqrt(n p) for c in 0.01, 0.06, ..., 1.01 (21 values).
    Delay (regression-style tasks): 0.1 p, p, 10 p.
    Regularization weight: c sqrt(n p) for c in 0.001, 0.006, ..., 0.101.
    """
    scale = math.sqrt(n * p)
    clip_grid = CandidateGrid(PARAM_CLIP, [c * scale for c in _arith_grid(0.01, 1.01, 0.05)], q)
    if task == "mean":
        return [clip_grid]
    delay_grid = CandidateGrid(PARAM_DELAY, [0.1 * p, float(p), 10.0 * p], q)
    reg_grid = CandidateGrid(
        PARAM_REG_WEIGHT, [c * scale for c in _arith_grid(0.001, 0.101, 0.005)], q
    )
    return [clip_grid, delay_grid, reg_grid]
