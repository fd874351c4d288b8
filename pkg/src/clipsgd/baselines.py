"""Batch robust mean estimators: coordinate-wise and geometric median-of-means.

Samples are bucketed contiguously in stream order (no shuffling, for
determinism and streaming compatibility), with any remainder spread over the
leading buckets. The geometric median is computed by Weiszfeld fixed-point
iteration with the standard modification for iterates that land on a data
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIANT_COORDINATE = "coordinate_wise"
VARIANT_GEOMETRIC = "geometric"

_COINCIDENCE_TOL = 1e-12


def mom_bucket_count(delta: float = 0.05) -> int:
    """Bucket count ceil(8 log(1/delta)) used by the benchmark comparisons."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(8.0 * math.log(1.0 / delta))


@dataclass(frozen=True)
class MoMConfig:
    n_buckets: int
    variant: str = VARIANT_COORDINATE
    weiszfeld_tol: float = 1e-8
    weiszfeld_max_iter: int = 1000

    def __post_init__(self):
        if self.n_buckets < 1:
            raise ValueError(f"need at least one bucket, got {self.n_buckets}")
        if self.variant not in (VARIANT_COORDINATE, VARIANT_GEOMETRIC):
            raise ValueError(f"unknown variant: {self.variant!r}")
        if self.weiszfeld_tol <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.weiszfeld_tol}")


@dataclass(frozen=True)
class GeometricMedianResult:
    point: np.ndarray
    iterations: int
    converged: bool
    objectives: tuple


def weiszfeld_objective(points: np.ndarray, m: np.ndarray) -> float:
    """Sum of Euclidean distances from m to the points."""
    return float(np.linalg.norm(points - m[None, :], axis=1).sum())


def geometric_median(points, tol: float = 1e-8, max_iter: int = 1000) -> GeometricMedianResult:
    """Geometric median by (modified) Weiszfeld iteration.

    Starts from the centroid. When the iterate coincides with a data point
    (within 1e-12) the plain update is singular; the modified step then mixes
    the reweighted update with the current point and stops early if the
    coincident point is itself optimal. Iteration ends when the step norm
    drops below ``tol``; hitting ``max_iter`` returns the last iterate with
    ``converged=False``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need a nonempty (n, dim) point array")
    if pts.shape[0] == 1:
        return GeometricMedianResult(pts[0].copy(), 0, True, (0.0,))

    m = pts.mean(axis=0)
    objectives = [weiszfeld_objective(pts, m)]
    for it in range(1, max_iter + 1):
        dists = np.linalg.norm(pts - m[None, :], axis=1)
        coincident = dists < _COINCIDENCE_TOL
        if not coincident.any():
            w = 1.0 / dists
            new = (w[:, None] * pts).sum(axis=0) / w.sum()
        else:
            # Modified Weiszfeld step at a data point (multiplicity eta):
            # move along the reweighted update of the remaining points unless
            # their pull is dominated by the coincident mass.
            eta = float(coincident.sum())
            rest = ~coincident
            if not rest.any():
                return GeometricMedianResult(m, it, True, tuple(objectives))
            w = 1.0 / dists[rest]
            t_point = (w[:, None] * pts[rest]).sum(axis=0) / w.sum()
            r_vec = ((pts[rest] - m[None, :]) / dists[rest][:, None]).sum(axis=0)
            r_norm = float(np.linalg.norm(r_vec))
            if r_norm <= eta:
                return GeometricMedianResult(m, it, True, tuple(objectives))
            frac = eta / r_norm
            new = (1.0 - frac) * t_point + frac * m
        step = float(np.linalg.norm(new - m))
        m = new
        objectives.append(weiszfeld_objective(pts, m))
        if step < tol:
            return GeometricMedianResult(m, it, True, tuple(objectives))
    return GeometricMedianResult(m, max_iter, False, tuple(objectives))


def bucket_means(samples: np.ndarray, n_buckets: int) -> np.ndarray:
    """Means of contiguous buckets; remainder goes to the leading buckets."""
    n = samples.shape[0]
    if n == 0:
        raise ValueError("need at least one sample")
    if n_buckets > n:
        raise ValueError(f"more buckets ({n_buckets}) than samples ({n})")
    return np.stack([b.mean(axis=0) for b in np.array_split(samples, n_buckets)])


def median_of_means(samples, config: MoMConfig) -> np.ndarray:
    """Median (coordinate-wise or geometric) of contiguous bucket means."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need a nonempty (n, dim) sample array")
    means = bucket_means(arr, config.n_buckets)
    if config.variant == VARIANT_COORDINATE:
        return np.median(means, axis=0)
    return geometric_median(means, tol=config.weiszfeld_tol,
                            max_iter=config.weiszfeld_max_iter).point
