"""Persistent graph homology of edge-weighted graphs.

The filtration keeps an edge while its weight is strictly greater than the
threshold. Births (component appearances) are the weights of a maximum
spanning forest; deaths (cycle disappearances) are the remaining weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import _accel
from .errors import ArgumentError
from .fconn import FcMatrix


def _frozen(a):
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted graph stored as parallel ``src < dst`` / weight arrays."""

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ArgumentError("num_nodes must be positive")
        s = np.asarray(self.src, dtype=np.int64).ravel()
        t = np.asarray(self.dst, dtype=np.int64).ravel()
        w = np.asarray(self.weight, dtype=np.float64).ravel()
        if not (s.size == t.size == w.size):
            raise ArgumentError("src, dst and weight must have equal length")
        if s.size:
            if min(s.min(), t.min()) < 0 or max(s.max(), t.max()) >= self.num_nodes:
                raise ArgumentError("edge endpoint out of range")
            if np.any(s == t):
                raise ArgumentError("self-loops are not allowed")
            if not np.all(np.isfinite(w)):
                raise ArgumentError("edge weights must be finite")
            lo, hi = np.minimum(s, t), np.maximum(s, t)
            key = lo * self.num_nodes + hi
            if np.unique(key).size != key.size:
                raise ArgumentError("duplicate edge")
            s, t = lo, hi
        object.__setattr__(self, "src", _frozen(s))
        object.__setattr__(self, "dst", _frozen(t))
        object.__setattr__(self, "weight", _frozen(w))

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Sequence[Tuple[int, int, float]]) -> "WeightedGraph":
        arr = list(edges)
        if not arr:
            return cls(num_nodes, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        s, t, w = zip(*arr)
        return cls(num_nodes, np.array(s), np.array(t), np.array(w, dtype=np.float64))

    @classmethod
    def from_fc(cls, fc: FcMatrix) -> "WeightedGraph":
        """Complete graph over all node pairs of a functional connectivity matrix."""
        i, j, r = fc.upper()
        return cls(fc.n, i, j, r)

    @classmethod
    def complete(cls, weights: np.ndarray) -> "WeightedGraph":
        """Complete graph from a symmetric matrix (diagonal ignored)."""
        n = weights.shape[0]
        i, j = np.triu_indices(n, k=1)
        return cls(n, i, j, weights[i, j])

    @property
    def num_edges(self) -> int:
        return int(self.weight.size)

    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()))


@dataclass(frozen=True, eq=False)
class PersistenceDecomposition:
    births: np.ndarray
    deaths: np.ndarray
    num_nodes: int
    num_components: int

    @property
    def degenerate(self) -> bool:
        return self.births.size == 0 or self.deaths.size == 0


@dataclass(frozen=True, eq=False)
class BettiCurve:
    thresholds: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray


def edge_order(g: WeightedGraph) -> np.ndarray:
    """Kruskal order: weight descending, then ``(src, dst)`` ascending."""
    return np.lexsort((g.dst, g.src, -g.weight))


def decompose(g: WeightedGraph, use_numba=None) -> PersistenceDecomposition:
    if g.num_edges == 0:
        empty = _frozen(np.empty(0))
        return PersistenceDecomposition(empty, _frozen(np.empty(0)), g.num_nodes, g.num_nodes)
    order = edge_order(g)
    mask, comps = _accel.spanning_forest_mask(
        g.num_nodes, g.src[order], g.dst[order], use_numba=use_numba
    )
    w = g.weight[order]
    births = np.sort(w[mask])
    deaths = np.sort(w[~mask])
    return PersistenceDecomposition(_frozen(births), _frozen(deaths), g.num_nodes, comps)


def betti_curve(d: PersistenceDecomposition, thresholds) -> BettiCurve:
    eps = np.asarray(thresholds, dtype=np.float64).ravel()
    if eps.size > 1 and not np.all(np.diff(eps) > 0):
        raise ArgumentError("thresholds must be strictly increasing")
    beta0 = d.num_components + np.searchsorted(d.births, eps, side="right")
    beta1 = d.deaths.size - np.searchsorted(d.deaths, eps, side="right")
    return BettiCurve(eps, beta0.astype(np.int64), beta1.astype(np.int64))


def betti_oracle(g: WeightedGraph, eps: float) -> Tuple[int, int]:
    """Reference Betti numbers by thresholding and a plain union-find."""
    parent = list(range(g.num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept = 0
    comps = g.num_nodes
    for u, v, w in g.edges():
        if w > eps:
            kept += 1
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                comps -= 1
    return comps, kept - g.num_nodes + comps


def threshold_grid(d: PersistenceDecomposition, grid: str) -> np.ndarray:
    """``"weights"`` -> every distinct weight; ``"uniform:K"`` -> K points
    spanning [min weight, max weight]."""
    allw = np.concatenate((d.births, d.deaths))
    if grid == "weights":
        return np.unique(allw)
    if grid.startswith("uniform:"):
        try:
            k = int(grid.split(":", 1)[1])
        except ValueError:
            raise ArgumentError(f"bad grid {grid!r}") from None
        if k < 1:
            raise ArgumentError("uniform grid needs K >= 1")
        if allw.size == 0:
            return np.zeros(1)
        lo, hi = float(allw.min()), float(allw.max())
        if k == 1 or lo == hi:
            return np.array([lo])
        return np.linspace(lo, hi, k)
    raise ArgumentError(f"unknown grid {grid!r}; use 'weights' or 'uniform:K'")
