"""Uniform prediction interface shared by every model family.

Decision rules are fixed contracts: probability >= 0.5 maps to label 1, a
raw score of exactly 0 maps to label 1, and vote ties map to label 1.  The
bisection search downstream relies on the labeling being total and
deterministic.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite or blew up during training (learning rate too large)."""


# stable losses saturate instead of overflowing, so divergence also has to be
# caught by magnitude; no sane run on standardized-scale data gets near this
_LOSS_BLOWUP = 1e6


@dataclass(frozen=True)
class TrainReport:
    train_accuracy: float
    epochs_or_trees: int
    final_loss: float | None = None


def stable_scores_vec(X: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    """X @ w + b accumulated feature by feature.

    Per-row arithmetic order is fixed, so scores are bit-identical no matter
    how the batch is chunked (BLAS may reorder accumulation by shape).
    """
    acc = np.full(X.shape[0], float(b))
    for j in range(X.shape[1]):
        acc += X[:, j] * w[j]
    return acc


def stable_scores_mat(X: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """X @ W + b with the same chunk-independence guarantee, W of shape (n, h)."""
    acc = np.tile(np.asarray(b, dtype=np.float64), (X.shape[0], 1))
    for j in range(X.shape[1]):
        acc += X[:, j, None] * W[j]
    return acc


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss_from_scores(z: np.ndarray, y: np.ndarray) -> float:
    # mean(softplus(z) - y*z), stable for large |z|
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


class Classifier(ABC):
    """Trained binary classifier: a pure function from points to {0, 1}."""

    family: str = "abstract"

    def __init__(self, n_features: int, hyperparameters: dict | None = None):
        self.n_features = int(n_features)
        self.hyperparameters = dict(hyperparameters or {})

    def predict(self, point) -> int:
        point = np.asarray(point, dtype=np.float64).reshape(-1)
        return int(self.predict_batch(point[None, :])[0])

    def predict_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise ValueError("predict_batch expects a 2-D matrix of points")
        if points.shape[1] != self.n_features:
            raise ValueError(
                f"point width {points.shape[1]} does not match model width {self.n_features}"
            )
        if points.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        return self._predict_batch(points)

    @abstractmethod
    def _predict_batch(self, points: np.ndarray) -> np.ndarray:
        """Width-checked prediction; returns an int64 vector of 0/1 labels."""


def check_two_classes(labels: np.ndarray) -> None:
    if np.unique(labels).size < 2:
        raise ValueError("training data holds a single class; need both 0 and 1")


def accuracy(model: Classifier, X: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(model.predict_batch(X) == y))
