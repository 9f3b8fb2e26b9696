"""Trainable binary classifiers behind one prediction interface."""

from __future__ import annotations

import numpy as np

from .base import Classifier, TrainingDivergedError, TrainReport, accuracy
from .forest import RandomForestModel, Tree, train_random_forest
from .io import load_model, model_fingerprint, model_from_dict, model_to_dict, save_model
from .linear import LinearSVMModel, LogisticModel, train_linear_svm, train_logistic
from .mlp import MLPModel, init_mlp, train_mlp

FAMILIES = {
    "logistic": train_logistic,
    "svm": train_linear_svm,
    "mlp": train_mlp,
    "forest": train_random_forest,
}


def predict_batch(model: Classifier, points) -> np.ndarray:
    """Element-wise equal to mapping model.predict over the rows."""
    return model.predict_batch(np.asarray(points, dtype=np.float64))


def train(family: str, data, **hyperparameters):
    """Dispatch by family name; raises ValueError for unknown families."""
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r} (choose from {sorted(FAMILIES)})")
    return FAMILIES[family](data, **hyperparameters)


__all__ = [
    "Classifier",
    "TrainReport",
    "TrainingDivergedError",
    "LogisticModel",
    "LinearSVMModel",
    "MLPModel",
    "RandomForestModel",
    "Tree",
    "train_logistic",
    "train_linear_svm",
    "train_mlp",
    "train_random_forest",
    "train",
    "predict_batch",
    "accuracy",
    "init_mlp",
    "save_model",
    "load_model",
    "model_fingerprint",
    "model_to_dict",
    "model_from_dict",
    "FAMILIES",
]
