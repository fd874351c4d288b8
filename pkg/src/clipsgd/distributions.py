"""Seedable heavy-tailed sample generators for the synthetic estimation tasks.

All randomness flows through counter-based Philox streams keyed by
``(master_seed, purpose, index)``, so any trial can be regenerated in
isolation and parallel execution is order-independent. Heavy-tailed draws
use a Pareto distribution with minimum 1 and shape ``beta`` (finite k-th
moments only for k < beta), affine-standardized per coordinate to a target
mean and standard deviation via the closed-form raw moments.

Block samplers draw the exact same underlying uniform sequence as repeated
single-sample calls on the same generator, so streaming and batched code
paths see bitwise-identical data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Stream purposes: keep sample streams, tuning streams and one-off Monte-Carlo
# estimation streams disjoint under a shared master seed.
PURPOSE_TRIAL = 0
PURPOSE_TUNING = 1
PURPOSE_ESTIMATION = 2


def stream(master_seed: int, index: int = 0, purpose: int = PURPOSE_TRIAL) -> np.random.Generator:
    """Independent counter-based generator for (master_seed, purpose, index)."""
    seq = np.random.SeedSequence((int(master_seed), int(purpose), int(index)))
    return np.random.Generator(np.random.Philox(seq))


def pareto_raw_moments(beta: float) -> tuple[float, float]:
    """Mean and variance of a raw Pareto with minimum 1 and shape ``beta`` > 2."""
    if beta <= 2.0:
        raise ValueError(f"tail parameter must exceed 2 for finite variance, got {beta}")
    mean = beta / (beta - 1.0)
    var = beta / ((beta - 1.0) ** 2 * (beta - 2.0))
    return mean, var


def pareto_kurtosis(beta: float) -> float:
    """Kurtosis (4th standardized moment) of a Pareto with shape ``beta`` > 4."""
    if beta <= 4.0:
        raise ValueError(f"kurtosis requires tail parameter > 4, got {beta}")
    return 3.0 * (beta - 2.0) * (3.0 * beta**2 + beta + 2.0) / (beta * (beta - 3.0) * (beta - 4.0))


@dataclass(frozen=True)
class ParetoSpec:
    """Standardized Pareto marginal: shape ``tail_param``, rescaled to mean/std.

    Sampling inverts the CDF, X = u^(-1/beta) for u uniform on (0, 1], then
    applies the affine map z = (X - m_beta) / s_beta so the output has the
    requested mean and standard deviation exactly in population.
    """

    tail_param: float
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.tail_param <= 2.0:
            raise ValueError(
                f"tail parameter must exceed 2 for finite variance, got {self.tail_param}"
            )
        if self.std <= 0.0:
            raise ValueError(f"std must be positive, got {self.std}")

    def raw_mean(self) -> float:
        return pareto_raw_moments(self.tail_param)[0]

    def raw_std(self) -> float:
        return math.sqrt(pareto_raw_moments(self.tail_param)[1])


def _standardize_raw(spec: ParetoSpec, raw):
    return spec.mean + spec.std * (raw - spec.raw_mean()) / spec.raw_std()


def pareto_from_uniforms(spec: ParetoSpec, u):
    """Map uniforms in [0, 1) through the inverse CDF and standardize.

    q = 0 hits the distribution minimum (raw value 1).
    """
    raw = (1.0 - np.asarray(u, dtype=np.float64)) ** (-1.0 / spec.tail_param)
    return _standardize_raw(spec, raw)


def pareto_standardized(spec: ParetoSpec, rng: np.random.Generator, size=None):
    """Draw standardized Pareto variates; scalar when ``size`` is None."""
    u = rng.random(size)
    out = pareto_from_uniforms(spec, u)
    return float(out) if size is None else out


@dataclass(frozen=True)
class MeanTaskSpec:
    """Mean estimation task: i.i.d. coordinates, x = mu + z with standardized z.

    Coordinates are independent unit-variance standardized Pareto, so the
    covariance is the identity and its trace equals the dimension.
    """

    dim: int
    true_mean: np.ndarray
    pareto: ParetoSpec = field(default_factory=lambda: ParetoSpec(2.1))

    def __post_init__(self):
        mu = np.asarray(self.true_mean, dtype=np.float64)
        if mu.shape != (self.dim,):
            raise ValueError(f"true_mean must have shape ({self.dim},), got {mu.shape}")
        object.__setattr__(self, "true_mean", mu)

    @property
    def sample_width(self) -> int:
        return self.dim


@dataclass(frozen=True)
class RegressionTaskSpec:
    """Linear regression task: y = <x, theta*> + w.

    Covariates are per-coordinate standardized Pareto with tail ``beta_x``
    (mean 0, covariance I); the noise w is standardized Pareto with tail
    ``beta_w`` rescaled to variance ``sigma2``.
    """

    dim: int
    true_param: np.ndarray
    beta_x: float = 4.1
    beta_w: float = 2.1
    sigma2: float = 0.75

    def __post_init__(self):
        theta = np.asarray(self.true_param, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ValueError(f"true_param must have shape ({self.dim},), got {theta.shape}")
        object.__setattr__(self, "true_param", theta)
        if self.sigma2 < 0.0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        ParetoSpec(self.beta_x)
        ParetoSpec(self.beta_w)

    @property
    def sample_width(self) -> int:
        return self.dim + 1


@dataclass(frozen=True)
class LogisticTaskSpec:
    """Logistic regression task: P(y=1 | x) = sigmoid(<x, theta*>), y in {0, 1}."""

    dim: int
    true_param: np.ndarray
    beta_x: float = 4.1
    radius: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.true_param, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ValueError(f"true_param must have shape ({self.dim},), got {theta.shape}")
        object.__setattr__(self, "true_param", theta)
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        ParetoSpec(self.beta_x)

    @property
    def sample_width(self) -> int:
        return self.dim + 1


def sparse_regression_spec(dim: int, sparsity: int, beta_x: float = 4.1,
                           beta_w: float = 2.1, sigma2: float = 0.75) -> RegressionTaskSpec:
    """Regression task whose true parameter has only its first ``sparsity`` entries
    nonzero (each 1/sqrt(sparsity))."""
    if not 1 <= sparsity <= dim:
        raise ValueError(f"sparsity must be in [1, {dim}], got {sparsity}")
    theta = np.zeros(dim)
    theta[:sparsity] = 1.0 / math.sqrt(sparsity)
    return RegressionTaskSpec(dim, theta, beta_x=beta_x, beta_w=beta_w, sigma2=sigma2)


# --- block samplers ---------------------------------------------------------
#
# Each sample consumes one row of uniforms: the dim covariate coordinates
# first, then (for regression/logistic) one auxiliary uniform for the noise
# or the label. Blocks therefore consume the generator exactly like n
# successive single draws.


def mean_sample_block(spec: MeanTaskSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random((n, spec.dim))
    return spec.true_mean + pareto_from_uniforms(spec.pareto, u)


def regression_sample_block(spec: RegressionTaskSpec, rng: np.random.Generator,
                            n: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((n, spec.dim + 1))
    x = pareto_from_uniforms(ParetoSpec(spec.beta_x), u[:, : spec.dim])
    w = pareto_from_uniforms(ParetoSpec(spec.beta_w, std=1.0), u[:, spec.dim])
    y = x @ spec.true_param + math.sqrt(spec.sigma2) * w
    return x, y


def logistic_sample_block(spec: LogisticTaskSpec, rng: np.random.Generator,
                          n: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((n, spec.dim + 1))
    x = pareto_from_uniforms(ParetoSpec(spec.beta_x), u[:, : spec.dim])
    prob = 1.0 / (1.0 + np.exp(-(x @ spec.true_param)))
    y = (u[:, spec.dim] < prob).astype(np.float64)
    return x, y


def gen_mean_sample(spec: MeanTaskSpec, rng: np.random.Generator) -> np.ndarray:
    return mean_sample_block(spec, rng, 1)[0]


def gen_regression_sample(spec: RegressionTaskSpec, rng: np.random.Generator):
    x, y = regression_sample_block(spec, rng, 1)
    return x[0], float(y[0])


def gen_logistic_sample(spec: LogisticTaskSpec, rng: np.random.Generator):
    x, y = logistic_sample_block(spec, rng, 1)
    return x[0], int(y[0])


def sample_stream(spec, rng: np.random.Generator):
    """Infinite iterator of samples for the given task spec."""
    if isinstance(spec, MeanTaskSpec):
        gen = gen_mean_sample
    elif isinstance(spec, RegressionTaskSpec):
        gen = gen_regression_sample
    elif isinstance(spec, LogisticTaskSpec):
        gen = gen_logistic_sample
    else:
        raise TypeError(f"unsupported task spec: {type(spec).__name__}")
    while True:
        yield gen(spec, rng)
