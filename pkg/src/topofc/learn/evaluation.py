"""Cross-validation protocols and classification metrics."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ArgumentError, DimensionError, StratificationError
from .mlp import MlpConfig, predict, train, with_input


def derive_seed(base_seed: int, index: int) -> int:
    """Stable per-task seed, independent of worker scheduling."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1)[0])


def stratified_kfold(labels, k: int, seed: int) -> list:
    """Split indices into ``k`` folds preserving class proportions.

    Each class is shuffled and dealt round-robin; the dealing offset carries
    over between classes so fold sizes stay within one of each other.
    """
    y = np.asarray(labels, dtype=np.int64).ravel()
    if k < 2:
        raise ArgumentError("k must be >= 2")
    classes, counts = np.unique(y, return_counts=True)
    small = classes[counts < k]
    if small.size:
        raise StratificationError(
            f"classes {small.tolist()} have fewer than k={k} members"
        )
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(y == c))
        for r, idx in enumerate(members):
            folds[(offset + r) % k].append(int(idx))
        offset = (offset + members.size) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def random_splits(n: int, count: int, seed: int, fractions=(0.8, 0.1, 0.1)) -> list:
    """``count`` random (train, val, test) index triples."""
    out = []
    n_train = int(np.floor(fractions[0] * n))
    n_val = int(np.floor(fractions[1] * n))
    for s in range(count):
        perm = np.random.default_rng(derive_seed(seed, s)).permutation(n)
        out.append((perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]))
    return out


def confusion_matrix(preds, labels, num_classes: Optional[int] = None) -> np.ndarray:
    p = np.asarray(preds, dtype=np.int64).ravel()
    t = np.asarray(labels, dtype=np.int64).ravel()
    if p.size != t.size:
        raise DimensionError("preds and labels differ in length")
    C = num_classes or int(max(p.max(initial=0), t.max(initial=0)) + 1)
    cm = np.zeros((C, C), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def weighted_f1_from_confusion(cm: np.ndarray) -> float:
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred_pos = cm.sum(axis=0)
    support = cm.sum(axis=1)
    denom = pred_pos + support
    # F1 = 2TP / (2TP + FP + FN) = 2TP / (predicted + actual)
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    total = support.sum()
    return float(np.sum(f1 * support) / total) if total else 0.0


def weighted_f1(preds, labels) -> float:
    p = np.asarray(preds).ravel()
    t = np.asarray(labels).ravel()
    if p.size != t.size:
        raise DimensionError("preds and labels differ in length")
    if p.size == 0:
        raise DimensionError("weighted_f1 needs at least one sample")
    return weighted_f1_from_confusion(confusion_matrix(p, t))


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    weighted_f1: float
    mean_accuracy: float
    std_accuracy: float
    mean_weighted_f1: float
    std_weighted_f1: float
    per_fold: tuple
    confusion: np.ndarray

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_weighted_f1": self.mean_weighted_f1,
            "std_weighted_f1": self.std_weighted_f1,
            "per_fold": [{"accuracy": a, "weighted_f1": f} for a, f in self.per_fold],
            "confusion": self.confusion.tolist(),
        }


def parse_protocol(text: str):
    """``kfold:K`` or ``splits:N`` (``random-splits:N`` also accepted)."""
    try:
        kind, num = text.split(":")
        num = int(num)
    except ValueError:
        raise ArgumentError(f"bad protocol {text!r}; use kfold:K or splits:N") from None
    if kind == "kfold" and num >= 2:
        return "kfold", num
    if kind in ("splits", "random-splits") and num >= 1:
        return "splits", num
    raise ArgumentError(f"bad protocol {text!r}; use kfold:K or splits:N")


def mlp_fit_predict(X_train, y_train, X_test, cfg: MlpConfig) -> np.ndarray:
    model = train(X_train, y_train, cfg)
    return predict(model, X_test)


def _standardize(X_train, X_test):
    mu = X_train.mean(axis=0)
    sd = X_train.std(axis=0)
    sd[sd == 0] = 1.0
    return (X_train - mu) / sd, (X_test - mu) / sd


def _run_task(args):
    X, y, train_idx, test_idx, cfg, standardize, fit_predict = args
    Xtr, Xte = X[train_idx], X[test_idx]
    if standardize:
        Xtr, Xte = _standardize(Xtr, Xte)
    preds = fit_predict(Xtr, y[train_idx], Xte, cfg)
    return np.asarray(preds, dtype=np.int64)


def evaluate(
    X,
    y,
    cfg: MlpConfig,
    protocol: str = "kfold:5",
    seed: int = 0,
    workers: int = 1,
    standardize: bool = True,
    fit_predict: Optional[Callable] = None,
) -> EvalReport:
    """Run a CV protocol on precomputed feature vectors.

    Every fold trains with a seed derived from ``(seed, fold index)`` so the
    report does not depend on ``workers``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    C = int(max(cfg.num_classes, y.max() + 1))
    fit_predict = fit_predict or mlp_fit_predict
    kind, num = parse_protocol(protocol)
    if kind == "kfold":
        folds = stratified_kfold(y, num, seed)
        pairs = []
        for f in range(num):
            train_idx = np.concatenate([folds[g] for g in range(num) if g != f])
            pairs.append((train_idx, folds[f]))
    else:
        pairs = [(tr, te) for tr, _, te in random_splits(y.size, num, seed)]

    tasks = [
        (X, y, tr, te, with_input(cfg, X.shape[1], C, derive_seed(seed, 1000 + f)), standardize, fit_predict)
        for f, (tr, te) in enumerate(pairs)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    per_fold = []
    cm = np.zeros((C, C), dtype=np.int64)
    for (_, te), preds in zip(pairs, results):
        fold_cm = confusion_matrix(preds, y[te], C)
        cm += fold_cm
        per_fold.append((float(np.trace(fold_cm) / fold_cm.sum()), weighted_f1_from_confusion(fold_cm)))
    accs = np.array([a for a, _ in per_fold])
    f1s = np.array([f for _, f in per_fold])
    return EvalReport(
        accuracy=float(np.trace(cm) / cm.sum()),
        weighted_f1=weighted_f1_from_confusion(cm),
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std()),
        mean_weighted_f1=float(f1s.mean()),
        std_weighted_f1=float(f1s.std()),
        per_fold=tuple(per_fold),
        confusion=cm,
    )
