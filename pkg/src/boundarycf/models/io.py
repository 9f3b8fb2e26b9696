"""Versioned model persistence: a self-describing JSON container per model.

Floats are serialized with repr precision, so a save/load round trip
reproduces predictions exactly.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .base import Classifier
from .forest import RandomForestModel, Tree
from .linear import LinearSVMModel, LogisticModel
from .mlp import MLPModel

FORMAT = "boundarycf-model"
VERSION = 1


def _params(model: Classifier) -> dict:
    if isinstance(model, (LogisticModel, LinearSVMModel)):
        return {"weights": model.weights.tolist(), "bias": model.bias}
    if isinstance(model, MLPModel):
        return {
            "weights": [W.tolist() for W in model.weights],
            "biases": [b.tolist() for b in model.biases],
        }
    if isinstance(model, RandomForestModel):
        return {
            "trees": [
                {
                    "feature": t.feature,
                    "threshold": t.threshold,
                    "left": t.left,
                    "right": t.right,
                    "label": t.label,
                }
                for t in model.trees
            ]
        }
    raise TypeError(f"cannot serialize model family {model.family!r}")


def model_to_dict(model: Classifier) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "family": model.family,
        "n_features": model.n_features,
        "hyperparameters": model.hyperparameters,
        "params": _params(model),
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def model_fingerprint(model: Classifier) -> str:
    """Stable hash of family + parameters, used to bind boundary sets to models.

    Model classes outside the built-in families are hashed by family and width
    only; they can still generate boundary sets, just with a coarser binding.
    """
    try:
        doc = model_to_dict(model)
    except TypeError:
        doc = {"family": model.family, "n_features": model.n_features}
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def save_model(model: Classifier, path) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(model_to_dict(model)))
        fh.write("\n")


def model_from_dict(doc: dict) -> Classifier:
    if doc.get("format") != FORMAT:
        raise ValueError("not a model container")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model container version {doc.get('version')}")
    family = doc["family"]
    params = doc["params"]
    hp = doc.get("hyperparameters", {})
    if family == "logistic":
        return LogisticModel(params["weights"], params["bias"], hp)
    if family == "svm":
        return LinearSVMModel(params["weights"], params["bias"], hp)
    if family == "mlp":
        return MLPModel(params["weights"], params["biases"], hp)
    if family == "forest":
        trees = [
            Tree(
                feature=list(t["feature"]),
                threshold=[float(x) for x in t["threshold"]],
                left=list(t["left"]),
                right=list(t["right"]),
                label=list(t["label"]),
            )
            for t in params["trees"]
        ]
        n_features = int(doc["n_features"])
        return RandomForestModel(trees, n_features, hp)
    raise ValueError(f"unknown model family {family!r}")


def load_model(path) -> Classifier:
    with open(path) as fh:
        doc = json.load(fh)
    model = model_from_dict(doc)
    if model.n_features != int(doc["n_features"]):
        raise ValueError("model container width disagrees with parameters")
    return model
