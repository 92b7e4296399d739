"""Hot loops with a numba path and a pure Python/numpy fallback.

Set ``TOPOFC_NO_NUMBA=1`` (or run without numba installed) to force the
fallback. Both paths return identical results.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("TOPOFC_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def _spanning_forest_mask(num_nodes, src, dst):
    """Kruskal pass over edges already in priority order.

    Returns a boolean mask of forest edges and the number of components.
    """
    parent = list(range(num_nodes))
    rank = [0] * num_nodes
    mask = np.zeros(len(src), dtype=np.bool_)
    merges = 0
    target = num_nodes - 1
    for k, (u, v) in enumerate(zip(src.tolist(), dst.tolist())):
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        if rank[ru] < rank[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        if rank[ru] == rank[rv]:
            rank[ru] += 1
        mask[k] = True
        merges += 1
        if merges == target:
            break
    return mask, num_nodes - merges


def _count_components(num_nodes, src, dst):
    parent = list(range(num_nodes))
    comps = num_nodes
    for u, v in zip(src.tolist(), dst.tolist()):
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru != rv:
            parent[rv] = ru
            comps -= 1
    return comps


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _find_nb(parent, x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            nxt = parent[x]
            parent[x] = root
            x = nxt
        return root

    @njit(cache=True, nogil=True)
    def _spanning_forest_mask_nb(num_nodes, src, dst):
        parent = np.arange(num_nodes)
        rank = np.zeros(num_nodes, dtype=np.int64)
        mask = np.zeros(src.shape[0], dtype=np.bool_)
        merges = 0
        target = num_nodes - 1
        for k in range(src.shape[0]):
            if merges == target:
                break
            ru = _find_nb(parent, src[k])
            rv = _find_nb(parent, dst[k])
            if ru == rv:
                continue
            if rank[ru] < rank[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            if rank[ru] == rank[rv]:
                rank[ru] += 1
            mask[k] = True
            merges += 1
        return mask, num_nodes - merges

    @njit(cache=True, nogil=True)
    def _count_components_nb(num_nodes, src, dst):
        parent = np.arange(num_nodes)
        comps = num_nodes
        for k in range(src.shape[0]):
            ru = _find_nb(parent, src[k])
            rv = _find_nb(parent, dst[k])
            if ru != rv:
                parent[rv] = ru
                comps -= 1
        return comps


def spanning_forest_mask(num_nodes: int, src: np.ndarray, dst: np.ndarray, use_numba=None):
    use = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    if use:
        mask, comps = _spanning_forest_mask_nb(num_nodes, src, dst)
        return mask, int(comps)
    return _spanning_forest_mask(num_nodes, src, dst)


def count_components(num_nodes: int, src: np.ndarray, dst: np.ndarray, use_numba=None) -> int:
    use = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    if use:
        return int(_count_components_nb(num_nodes, src, dst))
    return _count_components(num_nodes, src, dst)
