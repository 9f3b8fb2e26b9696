"""Random forest of CART trees: bootstrap sampling, Gini splits, majority vote."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datasets import Dataset
from .base import Classifier, TrainReport, accuracy, check_two_classes


@dataclass
class Tree:
    """Flat array encoding; feature -1 marks a leaf, route left on value <= threshold."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    label: list[int] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.label.append(1)
        return len(self.feature) - 1

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        label = np.asarray(self.label)
        cur = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = feature[cur]
            inner = feat >= 0
            if not inner.any():
                break
            go_left = np.zeros(X.shape[0], dtype=bool)
            rows = np.flatnonzero(inner)
            go_left[rows] = X[rows, feat[rows]] <= threshold[cur[rows]]
            nxt = np.where(go_left, left[cur], right[cur])
            cur = np.where(inner, nxt, cur)
        return label[cur]


def _best_gini_split(X: np.ndarray, y: np.ndarray):
    """Best (feature, threshold, weighted_gini); None when no split separates anything."""
    n = y.size
    total1 = int(y.sum())
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        v = X[order, f]
        ones = np.cumsum(y[order])
        cut = np.flatnonzero(v[:-1] < v[1:])  # split only between distinct values
        if cut.size == 0:
            continue
        left_n = cut + 1.0
        right_n = n - left_n
        left1 = ones[cut]
        right1 = total1 - left1
        gini_l = 1.0 - (left1 / left_n) ** 2 - ((left_n - left1) / left_n) ** 2
        gini_r = 1.0 - (right1 / right_n) ** 2 - ((right_n - right1) / right_n) ** 2
        weighted = (left_n * gini_l + right_n * gini_r) / n
        k = int(np.argmin(weighted))
        if best is None or weighted[k] < best[2]:
            thr = 0.5 * (v[cut[k]] + v[cut[k] + 1])
            best = (f, float(thr), float(weighted[k]))
    return best


def _grow(tree: Tree, X: np.ndarray, y: np.ndarray, depth: int, max_depth: int) -> int:
    node = tree.add_node()
    ones = int(y.sum())
    tree.label[node] = 1 if 2 * ones >= y.size else 0  # majority, tie -> 1
    if depth >= max_depth or ones == 0 or ones == y.size:
        return node
    found = _best_gini_split(X, y)
    if found is None:
        return node
    f, thr, _ = found
    mask = X[:, f] <= thr
    tree.feature[node] = f
    tree.threshold[node] = thr
    tree.left[node] = _grow(tree, X[mask], y[mask], depth + 1, max_depth)
    tree.right[node] = _grow(tree, X[~mask], y[~mask], depth + 1, max_depth)
    return node


class RandomForestModel(Classifier):
    family = "forest"

    def __init__(self, trees: list[Tree], n_features: int, hyperparameters=None):
        if not trees:
            raise ValueError("forest needs at least one tree")
        super().__init__(n_features, hyperparameters)
        self.trees = list(trees)

    def _predict_batch(self, points):
        votes = np.zeros(points.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict_batch(points)
        # vote tie maps to label 1
        return (2 * votes >= len(self.trees)).astype(np.int64)


def train_random_forest(
    data: Dataset, n_trees: int = 50, max_depth: int = 8, seed: int = 0
) -> tuple[RandomForestModel, TrainReport]:
    """Bootstrap-sampled CART trees; randomness lives only in training."""
    check_two_classes(data.labels)
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    rng = np.random.default_rng(seed)
    X, y = data.rows, data.labels
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, data.n_samples, data.n_samples)
        tree = Tree()
        _grow(tree, X[idx], y[idx], 0, max_depth)
        trees.append(tree)
    hp = {"n_trees": n_trees, "max_depth": max_depth, "seed": seed}
    model = RandomForestModel(trees, data.n_features, hp)
    return model, TrainReport(accuracy(model, X, y), n_trees, None)
