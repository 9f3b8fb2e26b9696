"""Fully connected network with tanh hidden layers and a sigmoid output."""

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
    stable_scores_mat,
)


class MLPModel(Classifier):
    family = "mlp"

    def __init__(self, weights, biases, hyperparameters=None):
        weights = [np.asarray(W, dtype=np.float64) for W in weights]
        biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in biases]
        if len(weights) != len(biases) or len(weights) < 2:
            raise ValueError("need one weight/bias pair per layer, at least two layers")
        super().__init__(weights[0].shape[0], hyperparameters)
        self.weights = weights
        self.biases = biases

    @property
    def hidden_sizes(self) -> list[int]:
        return [W.shape[1] for W in self.weights[:-1]]

    def _forward(self, X: np.ndarray):
        """Returns hidden activations per layer plus the output pre-activation (m,)."""
        activations = [X]
        a = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(stable_scores_mat(a, W, b))
            activations.append(a)
        z_out = stable_scores_mat(a, self.weights[-1], self.biases[-1])[:, 0]
        return activations, z_out

    def decision_scores(self, points: np.ndarray) -> np.ndarray:
        return self._forward(points)[1]

    def _predict_batch(self, points):
        # sigmoid(z) >= 0.5 iff z >= 0
        return (self.decision_scores(points) >= 0.0).astype(np.int64)

    def loss(self, X: np.ndarray, y: np.ndarray) -> float:
        _, z = self._forward(np.asarray(X, dtype=np.float64))
        return log_loss_from_scores(z, np.asarray(y, dtype=np.float64))

    def loss_gradients(self, X, y):
        """Analytic mean-log-loss gradients; same layout as (weights, biases)."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        m = X.shape[0]
        activations, z = self._forward(X)
        loss = log_loss_from_scores(z, y)
        grads_W: list[np.ndarray] = [None] * len(self.weights)
        grads_b: list[np.ndarray] = [None] * len(self.biases)
        delta = ((sigmoid(z) - y) / m)[:, None]
        for layer in range(len(self.weights) - 1, -1, -1):
            a_prev = activations[layer]
            grads_W[layer] = a_prev.T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (1.0 - activations[layer] ** 2)
        return loss, grads_W, grads_b

    def flat_gradients(self, X, y) -> np.ndarray:
        """Loss gradients flattened in the same layout as get_flat_params."""
        _, grads_W, grads_b = self.loss_gradients(X, y)
        return np.concatenate([a.ravel() for a in grads_W + grads_b])

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.weights + self.biases])

    def set_flat_params(self, flat: np.ndarray) -> None:
        pos = 0
        for arrs in (self.weights, self.biases):
            for i, a in enumerate(arrs):
                arrs[i] = flat[pos : pos + a.size].reshape(a.shape).copy()
                pos += a.size
        if pos != flat.size:
            raise ValueError("flat parameter vector has the wrong length")


def init_mlp(n_features: int, hidden_sizes: list[int], seed: int, hyperparameters=None) -> MLPModel:
    if not hidden_sizes:
        raise ValueError("hidden_sizes must be non-empty")
    rng = np.random.default_rng(seed)
    sizes = [n_features] + list(hidden_sizes) + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return MLPModel(weights, biases, hyperparameters)


def train_mlp(
    data: Dataset,
    hidden_sizes: list[int] = (8,),
    learning_rate: float = 0.1,
    epochs: int = 800,
    seed: int = 0,
    batch_size: int | None = None,
) -> tuple[MLPModel, TrainReport]:
    """Backprop with full-batch gradient descent (mini-batch opt-in); seeded init."""
    check_two_classes(data.labels)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    hp = {
        "hidden_sizes": list(hidden_sizes),
        "learning_rate": learning_rate,
        "epochs": epochs,
        "seed": seed,
        "batch_size": batch_size,
    }
    model = init_mlp(data.n_features, list(hidden_sizes), seed, hp)
    X, y = data.rows, data.labels.astype(np.float64)
    rng = np.random.default_rng(seed)
    loss = np.inf
    for _ in range(epochs):
        if batch_size is None or batch_size >= data.n_samples:
            batches = [slice(None)]
        else:
            order = rng.permutation(data.n_samples)
            batches = [order[s : s + batch_size] for s in range(0, data.n_samples, batch_size)]
        for batch in batches:
            loss, gW, gb = model.loss_gradients(X[batch], y[batch])
            if not np.isfinite(loss) or loss > _LOSS_BLOWUP:
                raise TrainingDivergedError(f"MLP loss became non-finite (lr={learning_rate})")
            for i in range(len(model.weights)):
                model.weights[i] = model.weights[i] - learning_rate * gW[i]
                model.biases[i] = model.biases[i] - learning_rate * gb[i]
    final = model.loss(X, y)
    if not np.isfinite(final) or final > _LOSS_BLOWUP:
        raise TrainingDivergedError("MLP loss became non-finite")
    return model, TrainReport(accuracy(model, X, data.labels), epochs, final)
