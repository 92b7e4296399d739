"""Two-layer perceptron with hand-written backpropagation and Adam."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..errors import ArgumentError, DegenerateLabelsError, DimensionError

PARAMS = ("W1", "b1", "W2", "b2")


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    num_classes: int
    hidden_dim: int = 64
    dropout: float = 0.3
    lr: float = 1e-3
    weight_decay: float = 1e-4
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.num_classes, self.hidden_dim, self.epochs, self.batch_size) < 1:
            raise ArgumentError("dimensions, epochs and batch size must be >= 1")
        if not 0 <= self.dropout < 1:
            raise ArgumentError("dropout must lie in [0, 1)")
        if not self.lr > 0:
            raise ArgumentError("learning rate must be positive")
        if self.weight_decay < 0:
            raise ArgumentError("weight decay must be non-negative")


@dataclass
class MlpModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    config: MlpConfig
    history: list = field(default_factory=list)

    def params(self) -> dict:
        return {k: getattr(self, k) for k in PARAMS}


def init_model(cfg: MlpConfig, rng: np.random.Generator) -> MlpModel:
    def glorot(fan_out, fan_in):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_out, fan_in))

    return MlpModel(
        W1=glorot(cfg.hidden_dim, cfg.input_dim),
        b1=np.zeros(cfg.hidden_dim),
        W2=glorot(cfg.num_classes, cfg.hidden_dim),
        b2=np.zeros(cfg.num_classes),
        config=cfg,
    )


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _dropout_mask(rng, shape, p):
    if p == 0:
        return None
    return (rng.random(shape) >= p) / (1.0 - p)


def _forward(model: MlpModel, X: np.ndarray, mask):
    z1 = X @ model.W1.T + model.b1
    a1 = np.maximum(z1, 0.0)
    h = a1 if mask is None else a1 * mask
    logits = h @ model.W2.T + model.b2
    return z1, h, softmax(logits)


def forward(model: MlpModel, x, train_mode: bool = False, rng: Optional[np.random.Generator] = None):
    """Class probabilities for one sample (1-D ``x``) or a batch (2-D)."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.W1.shape[1]:
        raise DimensionError(f"input has {X.shape[1]} features, model expects {model.W1.shape[1]}")
    mask = None
    if train_mode:
        if rng is None:
            raise ArgumentError("train_mode forward needs a random generator")
        mask = _dropout_mask(rng, (X.shape[0], model.W1.shape[0]), model.config.dropout)
    probs = _forward(model, X, mask)[2]
    return probs[0] if single else probs


def loss_and_grads(model: MlpModel, X: np.ndarray, y: np.ndarray, mask=None, weight_decay: float = 0.0):
    """Mean cross-entropy plus ``weight_decay/2 * ||theta||^2`` and its gradient."""
    N = X.shape[0]
    z1, h, probs = _forward(model, X, mask)
    loss = -np.mean(np.log(np.maximum(probs[np.arange(N), y], 1e-300)))
    dlogits = probs.copy()
    dlogits[np.arange(N), y] -= 1.0
    dlogits /= N
    g = {
        "W2": dlogits.T @ h,
        "b2": dlogits.sum(axis=0),
    }
    dh = dlogits @ model.W2
    if mask is not None:
        dh = dh * mask
    dz1 = dh * (z1 > 0)
    g["W1"] = dz1.T @ X
    g["b1"] = dz1.sum(axis=0)
    if weight_decay:
        for k in PARAMS:
            theta = getattr(model, k)
            loss += 0.5 * weight_decay * float(np.sum(theta * theta))
            g[k] = g[k] + weight_decay * theta
    return float(loss), g


def train(embeddings, labels, cfg: MlpConfig) -> MlpModel:
    """Mini-batch Adam on mean cross-entropy; returns the final-epoch model.

    ``embeddings`` may be an ``(N, input_dim)`` array or a sequence of
    :class:`~topofc.embed.TopoEmbedding`.
    """
    X = _stack(embeddings)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != y.size:
        raise DimensionError("embeddings and labels differ in length")
    if X.shape[1] != cfg.input_dim:
        raise DimensionError(f"embeddings have {X.shape[1]} features, config says {cfg.input_dim}")
    if np.unique(y).size < 2:
        raise DegenerateLabelsError("training needs at least two classes")
    if y.min() < 0 or y.max() >= cfg.num_classes:
        raise ArgumentError("label outside 0..num_classes-1")

    rng = np.random.default_rng(cfg.seed)
    model = init_model(cfg, rng)
    b1, b2, eps = 0.9, 0.999, 1e-8
    m1 = {k: np.zeros_like(v) for k, v in model.params().items()}
    m2 = {k: np.zeros_like(v) for k, v in model.params().items()}
    step = 0
    N = X.shape[0]
    for _ in range(cfg.epochs):
        perm = rng.permutation(N)
        total = 0.0
        for start in range(0, N, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            mask = _dropout_mask(rng, (idx.size, cfg.hidden_dim), cfg.dropout)
            loss, g = loss_and_grads(model, X[idx], y[idx], mask, cfg.weight_decay)
            total += loss * idx.size
            step += 1
            c1 = 1 - b1 ** step
            c2 = 1 - b2 ** step
            for k in PARAMS:
                m1[k] = b1 * m1[k] + (1 - b1) * g[k]
                m2[k] = b2 * m2[k] + (1 - b2) * g[k] * g[k]
                theta = getattr(model, k)
                theta -= cfg.lr * (m1[k] / c1) / (np.sqrt(m2[k] / c2) + eps)
        model.history.append(total / N)
    return model


def predict(model: MlpModel, X) -> np.ndarray:
    return np.argmax(forward(model, np.atleast_2d(_stack(X))), axis=1)


def _reference_loss(model: MlpModel, X: np.ndarray, y: np.ndarray, weight_decay: float) -> float:
    """Loss without dropout in extended precision via log-softmax.

    Central differences of a double-precision loss near 2.0 resolve gradients
    only to about 2e-11 at step 1e-5; the wider mantissa pushes that well below
    the tiniest gradients a small random batch produces.
    """
    ld = np.longdouble
    W1, b1, W2, b2 = (getattr(model, k).astype(ld) for k in PARAMS)
    h = np.maximum(X.astype(ld) @ W1.T + b1, 0)
    z = h @ W2.T + b2
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(X.shape[0]), y].mean()
    if weight_decay:
        loss += ld(0.5) * ld(weight_decay) * sum((t * t).sum() for t in (W1, b1, W2, b2))
    return loss


def gradient_check(model: MlpModel, batch, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients
    (dropout disabled, weight decay from the model's config)."""
    X, y = batch
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64).ravel()
    wd = model.config.weight_decay
    _, analytic = loss_and_grads(model, X, y, None, wd)
    worst = 0.0
    for k in PARAMS:
        theta = getattr(model, k)
        flat = theta.reshape(-1)
        ga = analytic[k].reshape(-1)
        for t in range(flat.size):
            old = flat[t]
            flat[t] = old + step
            lp = _reference_loss(model, X, y, wd)
            flat[t] = old - step
            lm = _reference_loss(model, X, y, wd)
            flat[t] = old
            gn = float((lp - lm) / (2 * step))
            err = abs(ga[t] - gn) / max(1e-8, abs(ga[t]) + abs(gn))
            worst = max(worst, err)
    return worst


def _stack(embeddings) -> np.ndarray:
    if isinstance(embeddings, np.ndarray):
        return np.atleast_2d(embeddings.astype(np.float64, copy=False))
    rows = [e.vector() if hasattr(e, "vector") else np.asarray(e, dtype=np.float64) for e in embeddings]
    return np.vstack(rows) if rows else np.empty((0, 0))


def with_input(cfg: MlpConfig, input_dim: int, num_classes: int, seed: int) -> MlpConfig:
    return replace(cfg, input_dim=input_dim, num_classes=num_classes, seed=seed)
