"""Standalone MLP classifier over topological embeddings."""

from .evaluation import (
    EvalReport,
    confusion_matrix,
    derive_seed,
    evaluate,
    parse_protocol,
    random_splits,
    stratified_kfold,
    weighted_f1,
)
from .mlp import MlpConfig, MlpModel, forward, gradient_check, init_model, predict, train

__all__ = [
    "EvalReport",
    "MlpConfig",
    "MlpModel",
    "confusion_matrix",
    "derive_seed",
    "evaluate",
    "forward",
    "gradient_check",
    "init_model",
    "parse_protocol",
    "predict",
    "random_splits",
    "stratified_kfold",
    "train",
    "weighted_f1",
]
