"""Node feature matrices for functional connectivity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateFeatureError, PolicyError
from .graphstore import Graph

KINDS = ("intrinsic", "label_onehot", "ldp", "concat")

# CLI spelling -> policy
_CLI_NAMES = {
    "intrinsic": ("intrinsic",),
    "labels": ("label_onehot",),
    "ldp": ("ldp",),
    "intrinsic+ldp": ("intrinsic", "ldp"),
    "labels+ldp": ("label_onehot", "ldp"),
}


@dataclass(frozen=True)
class FeaturePolicy:
    """How to build node features.

    ``label_alphabet`` fixes the one-hot column order; when omitted the
    graph's own sorted distinct labels are used.
    """

    kind: str
    parts: tuple = ()
    label_alphabet: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PolicyError(f"unknown feature policy {self.kind!r}")
        if self.kind == "concat":
            if not self.parts:
                raise PolicyError("concat policy needs at least one component")
            for p in self.parts:
                if not isinstance(p, FeaturePolicy):
                    raise PolicyError("concat components must be FeaturePolicy instances")

    @classmethod
    def from_name(cls, name: str, label_alphabet: Optional[Sequence[int]] = None) -> "FeaturePolicy":
        try:
            kinds = _CLI_NAMES[name]
        except KeyError:
            raise PolicyError(
                f"unknown feature policy {name!r}; choose from {sorted(_CLI_NAMES)}"
            ) from None
        alpha = None if label_alphabet is None else tuple(int(v) for v in label_alphabet)
        comps = tuple(cls(k, label_alphabet=alpha) for k in kinds)
        return comps[0] if len(comps) == 1 else cls("concat", parts=comps)


def ldp(g: Graph) -> np.ndarray:
    """Local degree profile: degree and min/max/mean/std of neighbour degrees.

    Isolated nodes get all zeros; the standard deviation is the population one.
    """
    n = g.num_nodes
    deg = g.degrees()
    out = np.zeros((n, 5), dtype=np.float64)
    out[:, 0] = deg
    if g.num_edges == 0:
        return out
    src = np.concatenate((g.edges[:, 0], g.edges[:, 1]))
    dst = np.concatenate((g.edges[:, 1], g.edges[:, 0]))
    nbr_deg = deg[dst]
    has = deg > 0
    mins = np.full(n, np.iinfo(np.int64).max)
    maxs = np.zeros(n, dtype=np.int64)
    np.minimum.at(mins, src, nbr_deg)
    np.maximum.at(maxs, src, nbr_deg)
    # integer moment sums keep the result independent of edge order
    s1 = np.zeros(n, dtype=np.int64)
    s2 = np.zeros(n, dtype=np.int64)
    np.add.at(s1, src, nbr_deg)
    np.add.at(s2, src, nbr_deg * nbr_deg)
    k = np.where(has, deg, 1)
    out[has, 1] = mins[has]
    out[has, 2] = maxs[has]
    out[:, 3] = s1 / k
    out[:, 4] = np.sqrt((k * s2 - s1 * s1) / (k * k))
    return out


def _label_onehot(g: Graph, alphabet: Optional[tuple]) -> np.ndarray:
    if g.node_labels is None:
        raise PolicyError("label_onehot policy requires node labels")
    if alphabet is None:
        alphabet = tuple(int(v) for v in np.unique(g.node_labels))
    lookup = {lab: k for k, lab in enumerate(alphabet)}
    try:
        cols = np.array([lookup[int(v)] for v in g.node_labels], dtype=np.int64)
    except KeyError as exc:
        raise PolicyError(f"node label {exc.args[0]} not in the label alphabet") from None
    out = np.zeros((g.num_nodes, len(alphabet)), dtype=np.float64)
    out[np.arange(g.num_nodes), cols] = 1.0
    return out


def _build(g: Graph, policy: FeaturePolicy) -> np.ndarray:
    if policy.kind == "intrinsic":
        if g.node_attributes is None:
            raise PolicyError("intrinsic policy requires node attributes")
        return np.array(g.node_attributes, dtype=np.float64)
    if policy.kind == "label_onehot":
        return _label_onehot(g, policy.label_alphabet)
    if policy.kind == "ldp":
        return ldp(g)
    return np.hstack([_build(g, p) for p in policy.parts])


def node_features(g: Graph, policy: FeaturePolicy) -> np.ndarray:
    """Feature matrix with one row per node; rejects fewer than two columns."""
    X = _build(g, policy)
    if X.shape[1] < 2:
        raise DegenerateFeatureError(
            f"policy {policy.kind!r} yields d={X.shape[1]}; Pearson correlation needs "
            "d >= 2 (concatenate with 'ldp', e.g. --features labels+ldp)"
        )
    return X
