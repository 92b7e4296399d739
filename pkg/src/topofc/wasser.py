"""One-dimensional Wasserstein distances and barycenters of value sets."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .embed import quantile_samples
from .errors import ArgumentError, DimensionError, EmptySetError


def _values(a) -> np.ndarray:
    v = np.sort(np.asarray(a, dtype=np.float64).ravel())
    if v.size == 0:
        raise EmptySetError("value set is empty")
    if not np.all(np.isfinite(v)):
        raise ArgumentError("value set contains non-finite entries")
    return v


def wasserstein_p(a, b, p: float = 1.0) -> float:
    """Exact p-Wasserstein distance between two empirical distributions.

    Both quantile functions are step functions with jumps at multiples of
    ``1/|a|`` and ``1/|b|``; the integral is summed over the merged grid of
    jump points, held as integers over ``lcm(|a|, |b|)``.
    """
    if p < 1:
        raise ArgumentError(f"p must be >= 1, got {p}")
    a = _values(a)
    b = _values(b)
    ka, kb = a.size, b.size
    L = ka * kb // math.gcd(ka, kb)
    cuts = np.union1d(np.arange(0, L + 1, L // ka), np.arange(0, L + 1, L // kb))
    left = cuts[:-1]
    width = np.diff(cuts) / L
    ia = left * ka // L
    ib = left * kb // L
    return float(np.sum(width * np.abs(a[ia] - b[ib]) ** p) ** (1.0 / p))


def wasserstein_matched(a, b, p: float = 1.0) -> float:
    """Equal-size closed form: mean over sorted coordinate pairs."""
    a = _values(a)
    b = _values(b)
    if a.size != b.size:
        raise DimensionError("sorted matching needs equal-size sets")
    return float(np.mean(np.abs(a - b) ** p) ** (1.0 / p))


def barycenter(sets: Sequence, resolution: Optional[int] = None) -> np.ndarray:
    """Quantile-mean of the inputs on the grid ``j/resolution``.

    This is the 2-Wasserstein barycenter restricted to ``resolution``
    atoms; the default resolution is the largest input size.
    """
    vals = [_values(s) for s in sets]
    if not vals:
        raise EmptySetError("barycenter needs at least one set")
    if resolution is None:
        resolution = max(v.size for v in vals)
    if resolution < 1:
        raise ArgumentError("resolution must be >= 1")
    Q = np.stack([quantile_samples(v, resolution) for v in vals])
    return Q.mean(axis=0)


def barycenter_with_spread(sets: Sequence, resolution: Optional[int] = None):
    """Barycenter plus the coordinatewise population std of the quantiles."""
    vals = [_values(s) for s in sets]
    if not vals:
        raise EmptySetError("barycenter needs at least one set")
    if resolution is None:
        resolution = max(v.size for v in vals)
    Q = np.stack([quantile_samples(v, resolution) for v in vals])
    z = np.arange(1, resolution + 1) / resolution
    return z, Q.mean(axis=0), Q.std(axis=0)


def embedding_distance(va, vb, p: float, m: int) -> float:
    """p-norm distance between two length-``m`` quantile embeddings,
    normalised so that it tends to the p-Wasserstein distance as m grows.

    The normalisation is ``m ** (1/p)``; for p = 1 this is division by m.
    """
    va = np.asarray(va, dtype=np.float64).ravel()
    vb = np.asarray(vb, dtype=np.float64).ravel()
    if va.size != m or vb.size != m:
        raise DimensionError(f"expected two vectors of length {m}, got {va.size} and {vb.size}")
    if p < 1:
        raise ArgumentError(f"p must be >= 1, got {p}")
    return float((np.sum(np.abs(va - vb) ** p) / m) ** (1.0 / p))


def pairwise_distances(sets: Sequence, p: float = 1.0):
    """Yield ``(i, j, w)`` for ``i < j``."""
    vals = [_values(s) for s in sets]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            yield i, j, wasserstein_p(vals[i], vals[j], p)
