"""Distance measures over feature representations."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DimsMismatch, ZeroVector
from .features import FeatureMatrix


class DistanceMetric(str, Enum):
    MSE = "mse"
    COSINE = "cos"
    MANHATTAN = "manhattan"
    CHEBYSHEV = "chebyshev"


ALL_METRICS = tuple(DistanceMetric)


def reduce_static(fm: FeatureMatrix) -> np.ndarray:
    """Per-dimension mean over frames; the comparison vector of a static vowel."""
    if fm.frames < 1:
        raise ValueError("need at least one frame")
    return fm.values.mean(axis=0)


def distance(a: np.ndarray, b: np.ndarray, m: DistanceMetric) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimsMismatch(f"shapes {a.shape} vs {b.shape}")
    if m is DistanceMetric.MSE:
        return float(np.mean((a - b) ** 2))
    if m is DistanceMetric.COSINE:
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        if denom == 0.0:
            raise ZeroVector("cosine distance undefined for a zero vector")
        return float(1.0 - np.dot(a, b) / denom)
    if m is DistanceMetric.MANHATTAN:
        return float(np.sum(np.abs(a - b)))
    if m is DistanceMetric.CHEBYSHEV:
        return float(np.max(np.abs(a - b)))
    raise ValueError(f"unknown metric {m!r}")


def matrix_distance(fa: FeatureMatrix, fb: FeatureMatrix, m: DistanceMetric,
                    framewise: bool = False) -> float:
    """Distance between two feature matrices.

    Default pools each matrix to its per-dimension mean first; framewise
    instead averages per-frame distances over aligned frames (frame counts
    must match).
    """
    if fa.dims != fb.dims:
        raise DimsMismatch(f"{fa.dims} vs {fb.dims} dims")
    if not framewise:
        return distance(reduce_static(fa), reduce_static(fb), m)
    if fa.frames != fb.frames:
        raise DimsMismatch(f"framewise mode needs equal frame counts, "
                           f"got {fa.frames} vs {fb.frames}")
    return float(np.mean([distance(ra, rb, m) for ra, rb in zip(fa.values, fb.values)]))


def metric_from_name(name: str) -> DistanceMetric:
    try:
        return DistanceMetric(name)
    except ValueError:
        raise ValueError(f"unknown metric name {name!r}") from None
