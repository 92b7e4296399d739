"""Topological embeddings of graphs from Pearson functional connectivity
and persistent graph homology."""

from .embed import MnPolicy, TopoEmbedding, embed, empirical_cdf, pseudo_inverse, select_mn
from .fconn import FcMatrix, functional_connectivity, pearson
from .featsynth import FeaturePolicy, ldp, node_features
from .graphstore import Dataset, Graph, graph_slice, parse_tudataset, validate, write_tudataset
from .pgh import BettiCurve, PersistenceDecomposition, WeightedGraph, betti_curve, betti_oracle, decompose
from .wasser import barycenter, embedding_distance, wasserstein_p

__version__ = "0.1.0"

__all__ = [
    "BettiCurve",
    "Dataset",
    "FcMatrix",
    "FeaturePolicy",
    "Graph",
    "MnPolicy",
    "PersistenceDecomposition",
    "TopoEmbedding",
    "WeightedGraph",
    "barycenter",
    "betti_curve",
    "betti_oracle",
    "decompose",
    "embed",
    "embedding_distance",
    "empirical_cdf",
    "functional_connectivity",
    "graph_slice",
    "ldp",
    "node_features",
    "parse_tudataset",
    "pearson",
    "pseudo_inverse",
    "select_mn",
    "validate",
    "wasserstein_p",
    "write_tudataset",
]
