import numpy as np
import pytest
from sklearn.metrics import f1_score

from topofc.errors import ArgumentError, DegenerateLabelsError, StratificationError
from topofc.learn import (
    MlpConfig,
    confusion_matrix,
    evaluate,
    forward,
    gradient_check,
    init_model,
    predict,
    stratified_kfold,
    train,
    weighted_f1,
)
from topofc.learn.evaluation import weighted_f1_from_confusion
from topofc.learn.mlp import loss_and_grads, softmax


def zero_model(d=3, h=4, C=2):
    cfg = MlpConfig(d, C, hidden_dim=h)
    m = init_model(cfg, np.random.default_rng(0))
    for k in ("W1", "b1", "W2", "b2"):
        getattr(m, k)[...] = 0
    return m


def test_forward_uniform_at_zero():
    assert forward(zero_model(), [1.0, 2.0, 3.0]).tolist() == [0.5, 0.5]


def test_forward_by_hand():
    m = zero_model(d=2, h=2, C=2)
    m.W1[...] = [[1, 0], [0, -1]]
    m.b1[...] = [0, 0.5]
    m.W2[...] = [[1, 1], [0, 2]]
    # hidden = relu([1, -2 + 0.5]) = [1, 0]; logits = [1, 0]
    p = forward(m, [1.0, 2.0])
    assert p.tolist() == pytest.approx([np.e / (np.e + 1), 1 / (np.e + 1)])


def test_forward_determinism_and_dropout(rng):
    cfg = MlpConfig(5, 3, hidden_dim=8, dropout=0.5)
    m = init_model(cfg, rng)
    x = rng.normal(size=(4, 5))
    assert np.array_equal(forward(m, x), forward(m, x))
    a = forward(m, x, True, np.random.default_rng(1))
    b = forward(m, x, True, np.random.default_rng(1))
    assert np.array_equal(a, b)
    with pytest.raises(ArgumentError):
        forward(m, x, True)


def test_softmax_normalised(rng):
    z = rng.normal(scale=300, size=(50, 7))
    assert np.allclose(softmax(z).sum(axis=1), 1, atol=1e-9)


def test_gradient_check_random_draws():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        cfg = MlpConfig(int(rng.integers(2, 8)), int(rng.integers(2, 4)), hidden_dim=8, weight_decay=1e-3)
        m = init_model(cfg, rng)
        B = int(rng.integers(1, 9))
        worst = max(worst, gradient_check(m, (rng.normal(size=(B, cfg.input_dim)), rng.integers(0, cfg.num_classes, B))))
    assert worst < 1e-4


def test_zero_input_gives_zero_layer1_weight_grads(rng):
    m = init_model(MlpConfig(4, 2, hidden_dim=6), rng)
    _, g = loss_and_grads(m, np.zeros((3, 4)), np.array([0, 1, 1]))
    assert np.all(g["W1"] == 0)


def test_softmax_gradient_identity(rng):
    m = init_model(MlpConfig(3, 2, hidden_dim=5), rng)
    x = rng.normal(size=(1, 3))
    p = forward(m, x)
    _, g = loss_and_grads(m, x, np.array([1]))
    assert np.allclose(g["b2"], p[0] - np.array([0.0, 1.0]), atol=1e-15)


def test_stratified_kfold():
    y = np.array([0] * 10 + [1] * 10)
    folds = stratified_kfold(y, 5, 0)
    assert sorted(np.concatenate(folds).tolist()) == list(range(20))
    for f in folds:
        assert np.bincount(y[f], minlength=2).tolist() == [2, 2]
    y = np.array([0] * 7 + [1] * 6)
    counts = {tuple(np.bincount(y[f], minlength=2)) for f in stratified_kfold(y, 5, 1)}
    for c0, c1 in counts:
        assert c0 in (1, 2) and c1 in (1, 2)
    assert all(np.array_equal(a, b) for a, b in zip(stratified_kfold(y, 5, 9), stratified_kfold(y, 5, 9)))
    with pytest.raises(StratificationError):
        stratified_kfold([0, 0, 0, 1], 2, 0)


def test_weighted_f1_examples():
    y = [0, 0, 1, 1, 1]
    p = [0, 1, 1, 1, 0]
    # class 0: f1 = 0.5 (support 2); class 1: f1 = 2/3 (support 3)
    assert weighted_f1(p, y) == pytest.approx((2 * 0.5 + 3 * 2 / 3) / 5)
    assert weighted_f1([0, 0, 0], [0, 1, 2]) == pytest.approx(0.5 / 3)


def test_weighted_f1_against_sklearn(rng):
    for _ in range(50):
        y = rng.integers(0, 4, 40)
        p = rng.integers(0, 4, 40)
        ours = weighted_f1_from_confusion(confusion_matrix(p, y, 4))
        assert ours == pytest.approx(f1_score(y, p, average="weighted", zero_division=0), abs=1e-12)


def clusters(rng, n=40, d=6):
    X = np.vstack([rng.normal(0, 0.1, (n, d)), rng.normal(1, 0.1, (n, d))])
    return X, np.array([0] * n + [1] * n)


def test_separable_clusters(rng):
    X, y = clusters(rng)
    m = train(X, y, MlpConfig(6, 2, hidden_dim=16, epochs=200))
    assert np.mean(predict(m, X) == y) == 1.0


def test_loss_descends(rng):
    X, y = clusters(rng)
    m = train(X, y, MlpConfig(6, 2, hidden_dim=16, dropout=0.0, epochs=200))
    assert m.history[-1] < m.history[0]


def test_shuffled_labels_near_chance():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(200, 5))
    y = rng.permutation(np.array([0, 1] * 100))
    rep = evaluate(X, y, MlpConfig(5, 2, hidden_dim=16, epochs=30), "kfold:5", seed=0)
    assert abs(rep.accuracy - 0.5) <= 0.1


def test_constant_predictor_majority(rng):
    y = np.array([0] * 30 + [1] * 20)
    X = rng.normal(size=(50, 3))
    rep = evaluate(X, y, MlpConfig(3, 2), "kfold:5", fit_predict=lambda a, b, c, cfg: np.zeros(len(c), dtype=int))
    assert rep.accuracy == pytest.approx(0.6)
    assert rep.mean_accuracy == pytest.approx(0.6)


def test_train_determinism(rng):
    X, y = clusters(rng, 10)
    cfg = MlpConfig(6, 2, hidden_dim=8, epochs=5, seed=4)
    a, b = train(X, y, cfg), train(X, y, cfg)
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)
    r1 = evaluate(X, y, cfg, "kfold:2", seed=2)
    r2 = evaluate(X, y, cfg, "kfold:2", seed=2)
    assert r1.as_dict() == r2.as_dict()


def test_single_class_rejected(rng):
    with pytest.raises(DegenerateLabelsError):
        train(rng.normal(size=(4, 2)), [1, 1, 1, 1], MlpConfig(2, 2))


def test_report_f1_matches_confusion(rng):
    X, y = clusters(rng, 15)
    rep = evaluate(X, y, MlpConfig(6, 2, hidden_dim=8, epochs=10), "kfold:3")
    assert rep.weighted_f1 == weighted_f1_from_confusion(rep.confusion)


def test_gradient_check_catches_wrong_gradient(rng, monkeypatch):
    from topofc.learn import mlp

    m = init_model(MlpConfig(4, 3, hidden_dim=6), rng)
    batch = (rng.normal(size=(5, 4)), rng.integers(0, 3, 5))
    real = mlp.loss_and_grads

    def skewed(*args, **kw):
        loss, g = real(*args, **kw)
        g["W2"] = g["W2"] * 1.01
        return loss, g

    monkeypatch.setattr(mlp, "loss_and_grads", skewed)
    assert gradient_check(m, batch) > 1e-3
