"""Loss aggregation over Monte-Carlo trials: mean errors and tail quantiles.

The tail metric Q_delta(errors) is the smallest observed error alpha whose
empirical exceedance fraction #(error > alpha)/n is at most delta — the
100(1-delta)-th percentile, taken without interpolation so it is always an
observed value. Index arithmetic is done in exact rational form so that
floating-point products like 0.1 * 10 cannot shift the order statistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np


def quantile_loss(errors, delta: float) -> float:
    """Empirical tail quantile: smallest alpha with exceedance fraction <= delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    arr = np.sort(np.asarray(errors, dtype=np.float64))
    n = arr.shape[0]
    if n == 0:
        raise ValueError("need at least one error value")
    # 1-based order statistic ceil((1-delta) n) == n - floor(delta n), exactly.
    m = int(Fraction(delta) * n)
    return float(arr[n - m - 1])


def quantile_curve(errors, deltas: Sequence[float]) -> list[float]:
    return [quantile_loss(errors, d) for d in deltas]


@dataclass(frozen=True)
class TrialMatrix:
    """Per-trial final errors (and optional error trajectories) for one method."""

    label: str
    final_errors: np.ndarray
    trajectories: Optional[np.ndarray] = None  # (trials, steps+1)

    def __post_init__(self):
        errs = np.asarray(self.final_errors, dtype=np.float64)
        if errs.ndim != 1 or errs.shape[0] == 0:
            raise ValueError("final_errors must be a nonempty 1-d array")
        if (errs < 0).any():
            raise ValueError("errors must be nonnegative")
        object.__setattr__(self, "final_errors", errs)
        if self.trajectories is not None:
            traj = np.asarray(self.trajectories, dtype=np.float64)
            if traj.ndim != 2 or traj.shape[0] != errs.shape[0]:
                raise ValueError("trajectories must be (trials, steps+1)")
            object.__setattr__(self, "trajectories", traj)

    def mean_error(self) -> float:
        return float(self.final_errors.mean())


@dataclass(frozen=True)
class QuantileReport:
    """Q_delta per method over a shared delta list; Q is non-increasing in delta."""

    deltas: tuple
    per_method: dict  # label -> list of Q_delta, aligned with deltas

    @staticmethod
    def from_trials(trials: Sequence[TrialMatrix], deltas: Sequence[float]) -> "QuantileReport":
        return QuantileReport(
            deltas=tuple(deltas),
            per_method={t.label: quantile_curve(t.final_errors, deltas) for t in trials},
        )


def convergence_curve(trajectories, tail_delta: float = 0.01) -> np.ndarray:
    """Pointwise (t, mean error, Q_{1-tail_delta} error) over equal-length trials.

    Returns an array of rows (t, mean, quantile) for t = 0..steps.
    """
    traj = np.asarray(trajectories, dtype=np.float64)
    if traj.ndim != 2:
        raise ValueError("trajectories must form a rectangular (trials, steps+1) array")
    steps = traj.shape[1]
    out = np.empty((steps, 3))
    out[:, 0] = np.arange(steps)
    out[:, 1] = traj.mean(axis=0)
    out[:, 2] = [quantile_loss(traj[:, t], tail_delta) for t in range(steps)]
    return out
