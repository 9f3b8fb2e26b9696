"""Logistic regression and linear SVM trained by (sub)gradient descent."""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from .base import (
    _LOSS_BLOWUP,
    Classifier,
    TrainingDivergedError,
    TrainReport,
    accuracy,
    check_two_classes,
    log_loss_from_scores,
    sigmoid,
    stable_scores_vec,
)


class LogisticModel(Classifier):
    family = "logistic"

    def __init__(self, weights, bias, hyperparameters=None):
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        super().__init__(weights.size, hyperparameters)
        self.weights = weights
        self.bias = float(bias)

    def decision_scores(self, points: np.ndarray) -> np.ndarray:
        return stable_scores_vec(points, self.weights, self.bias)

    def _predict_batch(self, points):
        # sigmoid(z) >= 0.5 iff z >= 0; comparing z keeps the tie exact
        return (self.decision_scores(points) >= 0.0).astype(np.int64)


class LinearSVMModel(Classifier):
    family = "svm"

    def __init__(self, weights, bias, hyperparameters=None):
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        super().__init__(weights.size, hyperparameters)
        self.weights = weights
        self.bias = float(bias)

    def decision_scores(self, points: np.ndarray) -> np.ndarray:
        return stable_scores_vec(points, self.weights, self.bias)

    def _predict_batch(self, points):
        # sign 0 maps to label 1
        return (self.decision_scores(points) >= 0.0).astype(np.int64)


def _epoch_batches(n: int, batch_size: int | None, rng: np.random.Generator):
    if batch_size is None or batch_size >= n:
        yield slice(None)
        return
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def train_logistic(
    data: Dataset,
    learning_rate: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
    batch_size: int | None = None,
) -> tuple[LogisticModel, TrainReport]:
    """Full-batch gradient descent on log-loss (mini-batch opt-in via batch_size)."""
    check_two_classes(data.labels)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    X, y = data.rows, data.labels.astype(np.float64)
    rng = np.random.default_rng(seed)
    w = np.zeros(data.n_features)
    b = 0.0
    loss = np.inf
    for _ in range(epochs):
        for batch in _epoch_batches(data.n_samples, batch_size, rng):
            Xb, yb = X[batch], y[batch]
            z = Xb @ w + b
            p = sigmoid(z)
            w -= learning_rate * (Xb.T @ (p - yb)) / Xb.shape[0]
            b -= learning_rate * float(np.mean(p - yb))
        loss = log_loss_from_scores(X @ w + b, y)
        if not np.isfinite(loss) or not np.isfinite(w).all() or loss > _LOSS_BLOWUP:
            raise TrainingDivergedError(f"log-loss became non-finite (lr={learning_rate})")
    hp = {"learning_rate": learning_rate, "epochs": epochs, "seed": seed, "batch_size": batch_size}
    model = LogisticModel(w, b, hp)
    return model, TrainReport(accuracy(model, X, data.labels), epochs, loss)


def train_linear_svm(
    data: Dataset,
    regularization: float = 1e-3,
    epochs: int = 500,
    seed: int = 0,
    batch_size: int | None = None,
) -> tuple[LinearSVMModel, TrainReport]:
    """Hinge-loss subgradient descent with L2 penalty, Pegasos-style step sizes."""
    check_two_classes(data.labels)
    if not regularization > 0:
        raise ValueError(f"regularization must be > 0, got {regularization}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = data.rows
    y_pm = 2.0 * data.labels - 1.0
    rng = np.random.default_rng(seed)
    w = np.zeros(data.n_features)
    b = 0.0
    t = 0
    loss = np.inf
    for _ in range(epochs):
        for batch in _epoch_batches(data.n_samples, batch_size, rng):
            t += 1
            eta = 1.0 / (regularization * t)
            Xb, yb = X[batch], y_pm[batch]
            margins = yb * (Xb @ w + b)
            viol = margins < 1.0
            gw = regularization * w
            gb = 0.0
            if viol.any():
                gw = gw - (yb[viol, None] * Xb[viol]).sum(axis=0) / Xb.shape[0]
                gb = -float(yb[viol].sum()) / Xb.shape[0]
            w -= eta * gw
            b -= eta * gb
        hinge = np.maximum(0.0, 1.0 - y_pm * (X @ w + b)).mean()
        loss = 0.5 * regularization * float(w @ w) + float(hinge)
        if not np.isfinite(loss) or not np.isfinite(w).all() or loss > _LOSS_BLOWUP:
            raise TrainingDivergedError("hinge loss became non-finite")
    hp = {"regularization": regularization, "epochs": epochs, "seed": seed, "batch_size": batch_size}
    model = LinearSVMModel(w, b, hp)
    return model, TrainReport(accuracy(model, X, data.labels), epochs, loss)
