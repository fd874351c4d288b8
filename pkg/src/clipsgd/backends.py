"""Backend selection for the batch trial kernel.

The compiled Cython kernel is preferred when its extension module imported
successfully; otherwise the pure-numpy fallback is used. Selection happens at
import and can be forced with the ``CLIPSGD_BACKEND`` environment variable
(``compiled`` / ``numpy`` / ``auto``) or at runtime via ``set_backend``.

Results are bitwise-reproducible within one backend; across backends they
agree to floating-point roundoff (row-reduction summation order differs), so
the harness records the active backend in every resolved config.
"""

from __future__ import annotations

import os
from typing import Optional

import numpy as np

from . import _numpy_kernel
from ._numpy_kernel import KIND_CODES, REG_CODES
from .models import LossModel
from .optimizer import OptimizerConfig

_IMPLS = {"numpy": _numpy_kernel}
try:
    from . import _speedups

    _IMPLS["compiled"] = _speedups
except ImportError:
    _speedups = None

_active = None


def available_backends() -> tuple:
    return tuple(sorted(_IMPLS))


def set_backend(name: str) -> str:
    """Force a backend by name ('compiled', 'numpy', or 'auto')."""
    global _active
    if name == "auto":
        _active = "compiled" if "compiled" in _IMPLS else "numpy"
    elif name in _IMPLS:
        _active = name
    else:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    return _active


def active_backend() -> str:
    return _active


set_backend(os.environ.get("CLIPSGD_BACKEND", "auto"))


def run_trials_batch(model: LossModel, config: OptimizerConfig, X: np.ndarray,
                     y: Optional[np.ndarray], record: Optional[bool] = None,
                     backend: Optional[str] = None):
    """Run one streaming trial per row of the sample block.

    X has shape (trials, steps, dim); y is (trials, steps) for regression and
    logistic tasks, None for mean estimation. Returns (final_params, error
    trajectories or None).
    """
    impl = _IMPLS[backend or _active]
    kind = KIND_CODES[model.kind]
    reg = config.regularizer
    reg_kind = REG_CODES[reg.kind if reg is not None else None]
    reg_param = reg.weight if reg is not None else 0.0
    theta0 = config.init_param if config.init_param is not None else model.default_init
    domain = model.domain
    return impl.run_trials(
        kind,
        np.ascontiguousarray(X, dtype=np.float64),
        None if y is None else np.ascontiguousarray(y, dtype=np.float64),
        np.asarray(theta0, dtype=np.float64),
        config.schedule.tau_l,
        config.schedule.gamma,
        config.clip_level,
        reg_kind,
        reg_param,
        domain.center if domain.is_ball else None,
        domain.radius if domain.is_ball else -1.0,
        model.true_param,
        config.record_trajectory if record is None else record,
    )
