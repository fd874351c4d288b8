"""Pure-numpy batch trial runner: the fallback for the compiled kernel.

Runs many independent streaming-SGD trials over pre-generated sample blocks,
vectorized across the trial axis step by step. Semantics match the compiled
kernel and the reference single-trial loop in ``optimizer.run``; all three
paths agree to floating-point roundoff (summation order inside row reductions
may differ by ulps).
"""

from __future__ import annotations

import numpy as np

KIND_CODES = {"mean": 0, "regression": 1, "logistic": 2}
REG_CODES = {None: 0, "ridge": 1, "lasso": 2, "huber": 3}


def _sigmoid_rows(z):
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def run_trials(kind: int, X, y, theta0, tau_l: float, gamma: float,
               clip_level, reg_kind: int, reg_param: float,
               ball_center, ball_radius: float, theta_star, record: bool):
    X = np.ascontiguousarray(X, dtype=np.float64)
    trials, n_steps, dim = X.shape
    th = np.tile(np.asarray(theta0, dtype=np.float64), (trials, 1))
    theta_star = np.asarray(theta_star, dtype=np.float64)
    errors = np.empty((trials, n_steps + 1)) if record else None

    project = ball_center is not None
    if project:
        center = np.asarray(ball_center, dtype=np.float64)[None, :]
        _project_rows(th, center, ball_radius)
    if record:
        diff = th - theta_star[None, :]
        errors[:, 0] = np.sqrt(np.einsum("ij,ij->i", diff, diff))

    for t in range(1, n_steps + 1):
        x = X[:, t - 1, :]
        if kind == 0:
            g = th - x
        elif kind == 1:
            r = y[:, t - 1] - np.einsum("ij,ij->i", x, th)
            if reg_kind == 3:
                r = np.clip(r, -reg_param, reg_param)
            g = -r[:, None] * x
        else:
            s = _sigmoid_rows(np.einsum("ij,ij->i", x, th))
            g = (s - y[:, t - 1])[:, None] * x

        if reg_kind == 1:
            g = g + reg_param * th
        elif reg_kind == 2:
            g = g + reg_param * np.sign(th)

        if clip_level is not None:
            norms = np.sqrt(np.einsum("ij,ij->i", g, g))
            over = norms > clip_level
            if over.any():
                g[over] *= (clip_level / norms[over])[:, None]

        th = th - (1.0 / (tau_l * (t + gamma))) * g
        if project:
            _project_rows(th, center, ball_radius)
        if record:
            diff = th - theta_star[None, :]
            errors[:, t] = np.sqrt(np.einsum("ij,ij->i", diff, diff))

    return th, errors


def _project_rows(th, center, radius):
    diff = th - center
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    out = dist > radius
    if out.any():
        th[out] = center + diff[out] * (radius / dist[out])[:, None]
