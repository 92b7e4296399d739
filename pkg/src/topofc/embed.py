"""Fixed-length vectors from birth/death sets by sampling the empirical
quantile function on a regular grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .errors import ArgumentError, EmptySetError
from .pgh import PersistenceDecomposition


def _as_sorted(s) -> np.ndarray:
    a = np.sort(np.asarray(s, dtype=np.float64).ravel())
    if a.size == 0:
        raise EmptySetError("value set is empty")
    return a


def empirical_cdf(s, x: float) -> float:
    """Fraction of ``s`` that is <= ``x``."""
    a = _as_sorted(s)
    return float(np.searchsorted(a, x, side="right")) / a.size


def pseudo_inverse(s, z: float) -> float:
    """Smallest element ``b`` of ``s`` with ``F(b) >= z``."""
    a = _as_sorted(s)
    if not 0 < z <= 1:
        raise ArgumentError(f"z must lie in (0, 1], got {z}")
    k = a.size
    idx = min(max(math.ceil(z * k), 1), k)
    # guard against z*k rounding one step too high
    if idx > 1 and (idx - 1) / k >= z:
        idx -= 1
    return float(a[idx - 1])


def quantile_samples(s, m: int) -> np.ndarray:
    """``F^{-1}(j/m)`` for ``j = 1..m``, using exact integer indices."""
    a = _as_sorted(s)
    if m < 1:
        raise ArgumentError("m must be >= 1")
    j = np.arange(1, m + 1, dtype=np.int64)
    idx = (j * a.size + m - 1) // m
    return a[idx - 1]


@dataclass(frozen=True, eq=False)
class TopoEmbedding:
    v_b: np.ndarray
    v_d: np.ndarray
    degenerate_b: bool = False
    degenerate_d: bool = False

    @property
    def m(self) -> int:
        return int(self.v_b.size)

    @property
    def n(self) -> int:
        return int(self.v_d.size)

    def vector(self) -> np.ndarray:
        return np.concatenate((self.v_b, self.v_d))


def embed(d: PersistenceDecomposition, m: int, n: int) -> TopoEmbedding:
    if m < 1 or n < 1:
        raise ArgumentError("m and n must be >= 1")
    deg_b = d.births.size == 0
    deg_d = d.deaths.size == 0
    v_b = np.zeros(m) if deg_b else quantile_samples(d.births, m)
    v_d = np.zeros(n) if deg_d else quantile_samples(d.deaths, n)
    return TopoEmbedding(v_b, v_d, deg_b, deg_d)


@dataclass(frozen=True)
class MnPolicy:
    kind: str
    m: int = 0
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("max", "min", "avg", "fixed"):
            raise ArgumentError(f"unknown m/n policy {self.kind!r}")
        if self.kind == "fixed" and (self.m < 1 or self.n < 1):
            raise ArgumentError("fixed policy requires m >= 1 and n >= 1")

    @classmethod
    def parse(cls, text: str) -> "MnPolicy":
        """``max``, ``min``, ``avg`` or ``fixed:M,N``."""
        if text.startswith("fixed"):
            try:
                m, n = text.split(":", 1)[1].split(",")
                return cls("fixed", int(m), int(n))
            except (IndexError, ValueError):
                raise ArgumentError(f"bad fixed policy {text!r}; expected fixed:M,N") from None
        return cls(text)


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def select_mn(ds_stats: Iterable[Tuple[int, int, int]], policy: MnPolicy) -> Tuple[int, int]:
    """Pick ``(m, n)`` from per-graph ``(num_nodes, birth_count, death_count)``."""
    stats = np.asarray(list(ds_stats), dtype=np.int64).reshape(-1, 3)
    if policy.kind == "fixed":
        return policy.m, policy.n
    if stats.shape[0] == 0:
        raise ArgumentError("no graph statistics given")
    if np.any(stats < 0):
        raise ArgumentError("counts must be non-negative")
    b, dd = stats[:, 1], stats[:, 2]
    if policy.kind == "max":
        return max(1, int(b.max())), max(1, int(dd.max()))
    if policy.kind == "min":
        return max(1, int(b.min())), max(1, int(dd.min()))
    return max(1, round_half_away(float(b.mean()))), max(1, round_half_away(float(dd.mean())))
