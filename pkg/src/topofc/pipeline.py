"""Dataset-level wiring: features -> functional connectivity -> persistence
-> embeddings -> cross-validated MLP."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from .embed import MnPolicy, embed, select_mn
from .errors import TopoFCError
from .fconn import functional_connectivity
from .featsynth import FeaturePolicy, node_features
from .graphstore import Dataset, Graph
from .learn.evaluation import EvalReport, evaluate
from .learn.mlp import MlpConfig
from .pgh import PersistenceDecomposition, WeightedGraph, decompose


@dataclass(frozen=True)
class GraphRecord:
    graph: int
    num_nodes: int
    decomposition: PersistenceDecomposition
    zero_variance_rows: int


@dataclass(frozen=True)
class PipelineConfig:
    features: str = "labels+ldp"
    mn: str = "avg"
    protocol: str = "kfold:5"
    hidden: int = 64
    dropout: float = 0.3
    lr: float = 1e-3
    weight_decay: float = 1e-4
    epochs: int = 200
    batch_size: int = 64
    standardize: bool = True
    seed: int = 0

    def mlp_config(self, num_classes: int = 2) -> MlpConfig:
        # input_dim is a placeholder, fixed per fold
        return MlpConfig(
            input_dim=1,
            num_classes=num_classes,
            hidden_dim=self.hidden,
            dropout=self.dropout,
            lr=self.lr,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
        )

    def as_dict(self) -> dict:
        return asdict(self)


def feature_policy(ds: Dataset, name: str) -> FeaturePolicy:
    alphabet = ds.node_label_alphabet() or None
    return FeaturePolicy.from_name(name, label_alphabet=alphabet)


def graph_fc(g: Graph, policy: FeaturePolicy):
    return functional_connectivity(node_features(g, policy))


def _extract_one(args) -> Tuple[PersistenceDecomposition, int]:
    idx, g, policy = args
    try:
        fc = graph_fc(g, policy)
    except TopoFCError as exc:
        raise type(exc)(f"graph {idx}: {exc}") from exc
    return decompose(WeightedGraph.from_fc(fc)), len(fc.zero_variance_rows)


def extract(ds: Dataset, policy: FeaturePolicy, workers: int = 1) -> List[GraphRecord]:
    """Per-graph persistence decompositions, ordered by graph id."""
    tasks = [(k, g, policy) for k, g in enumerate(ds.graphs)]
    if workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=chunk))
    else:
        results = [_extract_one(t) for t in tasks]
    return [
        GraphRecord(k, g.num_nodes, dec, zv)
        for (k, g, _), (dec, zv) in zip(tasks, results)
    ]


def embed_records(records: List[GraphRecord], mn: MnPolicy):
    stats = [(r.num_nodes, r.decomposition.births.size, r.decomposition.deaths.size) for r in records]
    m, n = select_mn(stats, mn)
    return m, n, [embed(r.decomposition, m, n) for r in records]


def embedding_matrix(ds: Dataset, cfg: PipelineConfig, workers: int = 1):
    records = extract(ds, feature_policy(ds, cfg.features), workers)
    m, n, embs = embed_records(records, MnPolicy.parse(cfg.mn))
    X = np.vstack([e.vector() for e in embs])
    return X, m, n


def crossval(ds: Dataset, cfg: PipelineConfig, workers: int = 1, fit_predict=None) -> Tuple[EvalReport, int, int]:
    """Embed every graph, then run ``cfg.protocol``; returns the report and (m, n)."""
    X, m, n = embedding_matrix(ds, cfg, workers)
    report = evaluate(
        X,
        ds.labels,
        cfg.mlp_config(ds.num_classes),
        protocol=cfg.protocol,
        seed=cfg.seed,
        workers=workers,
        standardize=cfg.standardize,
        fit_predict=fit_predict,
    )
    return report, m, n
