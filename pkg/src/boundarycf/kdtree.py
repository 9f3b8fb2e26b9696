"""Exact nearest neighbor under L2 with a deterministic lowest-index tie rule.

A bucket kd-tree over float64 points.  Queries compare squared distances and
break exact ties by the smaller point index, and the far side of a split is
visited whenever the splitting plane is within the current best distance
(non-strict), so results always match a full linear scan.
"""

from __future__ import annotations

import numpy as np


class NearestIndex:
    """Immutable kd-tree over a fixed point matrix."""

    def __init__(self, points, leaf_size: int = 16):
        points = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if points.ndim != 2:
            raise ValueError(f"points must be 2-D, got shape {points.shape}")
        if points.shape[0] == 0:
            raise ValueError("cannot build an index over zero points")
        if not np.isfinite(points).all():
            raise ValueError("points contain non-finite values")
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        self._points = points.copy()
        self._points.setflags(write=False)
        self._leaf_size = leaf_size
        self._perm = np.arange(points.shape[0])
        # parallel node arrays; axis -1 marks a leaf holding perm[start:end]
        self._axis: list[int] = []
        self._split: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._start: list[int] = []
        self._end: list[int] = []
        self._root = self._build(0, points.shape[0])

    @property
    def points(self) -> np.ndarray:
        """The indexed matrix, read-only, in original row order."""
        return self._points

    @property
    def n_points(self) -> int:
        return self._points.shape[0]

    @property
    def n_features(self) -> int:
        return self._points.shape[1]

    def _new_node(self) -> int:
        for arr in (self._axis, self._split, self._left, self._right, self._start, self._end):
            arr.append(0)
        return len(self._axis) - 1

    def _build(self, lo: int, hi: int) -> int:
        node = self._new_node()
        seg = self._points[self._perm[lo:hi]]
        spread = seg.max(axis=0) - seg.min(axis=0)
        axis = int(np.argmax(spread))
        if hi - lo <= self._leaf_size or spread[axis] == 0.0:
            self._axis[node] = -1
            self._start[node], self._end[node] = lo, hi
            return node
        mid = (hi - lo) // 2
        order = np.argpartition(seg[:, axis], mid)
        self._perm[lo:hi] = self._perm[lo:hi][order]
        split = float(self._points[self._perm[lo + mid], axis])
        self._axis[node] = axis
        self._split[node] = split
        self._left[node] = self._build(lo, lo + mid)
        self._right[node] = self._build(lo + mid, hi)
        return node

    def query(self, q) -> tuple[int, float]:
        """Index and L2 distance of the nearest point; ties go to the lowest index."""
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.n_features:
            raise ValueError(f"query has {q.shape[0]} features, index has {self.n_features}")
        best_d2 = np.inf
        best_idx = -1
        stack = [(self._root, 0.0)]
        while stack:
            node, plane_d2 = stack.pop()
            if plane_d2 > best_d2:
                continue
            while self._axis[node] != -1:
                axis, split = self._axis[node], self._split[node]
                delta = q[axis] - split
                if delta < 0.0:
                    near, far = self._left[node], self._right[node]
                else:
                    near, far = self._right[node], self._left[node]
                far_d2 = delta * delta
                if far_d2 <= best_d2:
                    stack.append((far, far_d2))
                node = near
            idx_seg = self._perm[self._start[node] : self._end[node]]
            d2 = np.sum((self._points[idx_seg] - q) ** 2, axis=1)
            local = float(np.min(d2))
            if local <= best_d2:
                cand = int(np.min(idx_seg[d2 == local]))
                if local < best_d2 or cand < best_idx:
                    best_d2, best_idx = local, cand
        return best_idx, float(np.sqrt(best_d2))

    def query_many(self, queries) -> tuple[np.ndarray, np.ndarray]:
        queries = np.asarray(queries, dtype=np.float64)
        if queries.ndim != 2:
            raise ValueError("queries must be a 2-D matrix")
        indices = np.empty(queries.shape[0], dtype=np.int64)
        distances = np.empty(queries.shape[0])
        for i, q in enumerate(queries):
            indices[i], distances[i] = self.query(q)
        return indices, distances
