"""Discrete decision-boundary points from bisection over opposite-class pairs.

The generator samples pairs (one correctly classified point per class),
bisects the interpolation parameter of each segment until the bracket is
narrower than epsilon, and emits the final bracket midpoint.  Every emitted
point is a convex combination of two dataset rows, so it stays inside the
per-feature data bounds.  A grid baseline is included for comparison; it
refuses up front when the lattice would blow the memory budget.
"""

from __future__ import annotations

import hashlib
import json
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .datasets import Dataset, feature_bounds
from .models import Classifier, model_fingerprint

DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_ITER = 60
DEFAULT_MEMORY_BUDGET = 16 * 1024**3
_PAIR_CHUNK = 8192  # fixed so output never depends on worker count
_FILE_MAGIC = b"BCFB"
_FILE_VERSION = 1


class NoCorrectRepresentativesError(ValueError):
    """A class has no correctly predicted points; boundary generation impossible."""


class CrossingFailedError(RuntimeError):
    """Stepping past the boundary point never flipped the prediction."""


class MemoryBudgetError(RuntimeError):
    """Grid evaluation refused before allocation; carries the byte estimate."""

    def __init__(self, estimated_bytes: int, budget_bytes: int):
        super().__init__(
            f"grid would need about {estimated_bytes} bytes, budget is {budget_bytes}"
        )
        self.estimated_bytes = estimated_bytes
        self.budget_bytes = budget_bytes


@dataclass(frozen=True)
class BisectionResult:
    alpha: float
    iterations: int
    left_label: int
    right_label: int
    truncated: bool = False

    def __post_init__(self):
        if self.left_label == self.right_label:
            raise ValueError("bracket endpoints must carry different labels")


@dataclass(frozen=True)
class BoundaryPointSet:
    """Discrete boundary points plus the generation metadata needed downstream.

    ``pair_indices[i]`` are row indices into ``class0_correct`` and
    ``class1_correct`` for the segment that produced ``points[i]``; grid-based
    sets have no pairs and leave all three empty.
    """

    points: np.ndarray
    epsilon: float
    threshold_t: int
    seed: int
    pair_indices: np.ndarray
    model_fingerprint: str
    class0_correct: np.ndarray
    class1_correct: np.ndarray
    truncated: np.ndarray
    source: str = "ssba"

    def __post_init__(self):
        for name in ("points", "class0_correct", "class1_correct"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        pairs = np.ascontiguousarray(np.asarray(self.pair_indices, dtype=np.int64)).reshape(-1, 2)
        pairs.setflags(write=False)
        object.__setattr__(self, "pair_indices", pairs)
        trunc = np.ascontiguousarray(np.asarray(self.truncated, dtype=bool)).reshape(-1)
        trunc.setflags(write=False)
        object.__setattr__(self, "truncated", trunc)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n_features(self) -> int:
        return self.points.shape[1]

    def has_pairs(self) -> bool:
        return self.pair_indices.shape[0] == len(self)

    def endpoint_class0(self, i: int) -> np.ndarray:
        return self.class0_correct[self.pair_indices[i, 0]]

    def endpoint_class1(self, i: int) -> np.ndarray:
        return self.class1_correct[self.pair_indices[i, 1]]

    def subset(self, indices) -> "BoundaryPointSet":
        indices = np.asarray(indices)
        pairs = self.pair_indices[indices] if self.has_pairs() else self.pair_indices
        return replace(
            self,
            points=self.points[indices],
            pair_indices=pairs,
            truncated=self.truncated[indices],
        )

    # ---------------------------------------------------------------- file io

    def save(self, path) -> None:
        """Deterministic container: same set -> byte-identical file."""
        header = {
            "count": len(self),
            "epsilon": self.epsilon,
            "m0": int(self.class0_correct.shape[0]),
            "m1": int(self.class1_correct.shape[0]),
            "model_fingerprint": self.model_fingerprint,
            "n": int(self.n_features),
            "seed": self.seed,
            "source": self.source,
            "threshold_t": self.threshold_t,
        }
        blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
        with open(path, "wb") as fh:
            fh.write(_FILE_MAGIC)
            fh.write(struct.pack("<I", _FILE_VERSION))
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
            for arr, dtype in (
                (self.points, "<f8"),
                (self.pair_indices, "<i8"),
                (self.class0_correct, "<f8"),
                (self.class1_correct, "<f8"),
                (self.truncated, "u1"),
            ):
                fh.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())

    @classmethod
    def load(cls, path, model: Classifier | None = None) -> "BoundaryPointSet":
        with open(path, "rb") as fh:
            if fh.read(4) != _FILE_MAGIC:
                raise ValueError(f"{path}: not a boundary point file")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != _FILE_VERSION:
                raise ValueError(f"{path}: unsupported boundary file version {version}")
            (hlen,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(hlen).decode())
            n, k = header["n"], header["count"]
            m0, m1 = header["m0"], header["m1"]

            def read_arr(shape, dtype):
                count = int(np.prod(shape)) if shape else 0
                raw = fh.read(count * np.dtype(dtype).itemsize)
                return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()

            points = read_arr((k, n), "<f8")
            pairs = read_arr((k if m0 or m1 else 0, 2), "<i8")
            c0 = read_arr((m0, n), "<f8")
            c1 = read_arr((m1, n), "<f8")
            trunc = read_arr((k,), "u1").astype(bool)
        loaded = cls(
            points=points,
            epsilon=header["epsilon"],
            threshold_t=header["threshold_t"],
            seed=header["seed"],
            pair_indices=pairs,
            model_fingerprint=header["model_fingerprint"],
            class0_correct=c0,
            class1_correct=c1,
            truncated=trunc,
            source=header["source"],
        )
        if model is not None and model_fingerprint(model) != loaded.model_fingerprint:
            warnings.warn(
                "boundary file was generated with a different model "
                f"(fingerprint {loaded.model_fingerprint[:12]}...)",
                stacklevel=2,
            )
        return loaded


# ------------------------------------------------------------------ operations


def select_correct(model: Classifier, data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Rows of each class that the model predicts correctly, dataset order kept."""
    preds = model.predict_batch(data.rows)
    x0 = data.rows[(data.labels == 0) & (preds == 0)]
    x1 = data.rows[(data.labels == 1) & (preds == 1)]
    if x0.shape[0] == 0:
        raise NoCorrectRepresentativesError("class 0 has no correctly predicted points")
    if x1.shape[0] == 0:
        raise NoCorrectRepresentativesError("class 1 has no correctly predicted points")
    return x0, x1


def alpha_binary_search(
    model: Classifier,
    x_a,
    x_b,
    y_a: int,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    on_step=None,
) -> BisectionResult:
    """Bisect the segment (1-a)*x_a + a*x_b for the label change.

    Keeps the left bracket end labeled ``y_a`` and the right end labeled
    otherwise; returns the final bracket midpoint once the bracket is narrower
    than epsilon (or the midpoint at max_iter, flagged truncated).  ``on_step``
    receives (l, r, alpha, label) after every probe, for instrumentation.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    x_a = np.asarray(x_a, dtype=np.float64).reshape(-1)
    x_b = np.asarray(x_b, dtype=np.float64).reshape(-1)
    if model.predict(x_a) != y_a:
        raise ValueError("x_a is not predicted as y_a")
    if model.predict(x_b) == y_a:
        raise ValueError("x_b must be predicted as the opposite label of y_a")
    l, r = 0.0, 1.0
    iterations = 0
    for _ in range(max_iter):
        alpha = 0.5 * (l + r)
        probe = (1.0 - alpha) * x_a + alpha * x_b
        label = model.predict(probe)
        if label == y_a:
            l = alpha
        else:
            r = alpha
        iterations += 1
        if on_step is not None:
            on_step(l, r, alpha, label)
        if r - l < epsilon:
            break
    return BisectionResult(
        alpha=0.5 * (l + r),
        iterations=iterations,
        left_label=y_a,
        right_label=1 - y_a,
        truncated=(r - l) >= epsilon,
    )


def _predict_chunked(model: Classifier, points: np.ndarray, batch_size: int) -> np.ndarray:
    out = np.empty(points.shape[0], dtype=np.int64)
    for start in range(0, points.shape[0], batch_size):
        out[start : start + batch_size] = model.predict_batch(points[start : start + batch_size])
    return out


def _bisect_block(model, A, B, epsilon, max_iter, batch_size):
    """Lock-step bisection over a block of segments; A rows labeled 0, B rows 1."""
    k = A.shape[0]
    l = np.zeros(k)
    r = np.ones(k)
    iterations = 0
    while iterations < max_iter and float(np.max(r - l)) >= epsilon:
        alpha = 0.5 * (l + r)
        probes = (1.0 - alpha)[:, None] * A + alpha[:, None] * B
        labels = _predict_chunked(model, probes, batch_size)
        at_left = labels == 0
        l = np.where(at_left, alpha, l)
        r = np.where(at_left, r, alpha)
        iterations += 1
    alphas = 0.5 * (l + r)
    truncated = (r - l) >= epsilon
    return alphas, truncated


def _sample_pair_ids(rng: np.random.Generator, total: int, k: int) -> np.ndarray:
    if total <= max(10_000_000, 20 * k):
        chosen = rng.choice(total, size=k, replace=False)
    else:
        # Floyd's sampling; avoids materializing the full index product
        picked: set[int] = set()
        for j in range(total - k, total):
            t = int(rng.integers(0, j + 1))
            picked.add(j if t in picked else t)
        chosen = np.fromiter(picked, dtype=np.int64, count=k)
    chosen.sort()
    return chosen


def _deduplicate(points: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Keep a point only when no earlier kept point is nearer than its threshold."""
    kept: list[int] = []
    for i in range(points.shape[0]):
        if kept:
            d2 = np.min(np.sum((points[kept] - points[i]) ** 2, axis=1))
            if d2 < thresholds[i] ** 2:
                continue
        kept.append(i)
    return np.asarray(kept, dtype=np.int64)


def generate_boundary_points(
    model: Classifier,
    data: Dataset,
    threshold_t: int,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    batch_size: int = 1000,
    max_iter: int = DEFAULT_MAX_ITER,
    deduplicate: bool = False,
    correct_sets: tuple[np.ndarray, np.ndarray] | None = None,
    n_workers: int = 1,
    progress=None,
) -> BoundaryPointSet:
    """Sample up to threshold_t opposite-class pairs and bisect each segment.

    Pairs are drawn uniformly without replacement from the product of the two
    correctly-predicted sets, then processed in ascending product-index order;
    all midpoint probes of a block go through predict_batch in groups of
    batch_size, so batch size never changes the result.  Emitted points are
    clipped to the per-feature data bounds (a no-op up to rounding, since they
    are convex combinations of rows).  Deduplication, off by default, drops a
    point whose distance to an earlier one is below epsilon times its own
    segment length.  ``progress`` receives (pairs_done, pairs_total).
    """
    if threshold_t < 1:
        raise ValueError(f"threshold_t must be >= 1, got {threshold_t}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    x0, x1 = correct_sets if correct_sets is not None else select_correct(model, data)
    m0, m1 = x0.shape[0], x1.shape[0]
    rng = np.random.default_rng(seed)
    total = m0 * m1
    k = min(threshold_t, total)
    chosen = _sample_pair_ids(rng, total, k)
    ai = chosen // m1
    bi = chosen % m1

    bounds = feature_bounds(data)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    blocks = [(s, min(s + _PAIR_CHUNK, k)) for s in range(0, k, _PAIR_CHUNK)]

    def run_block(span):
        s, e = span
        A = x0[ai[s:e]]
        B = x1[bi[s:e]]
        alphas, trunc = _bisect_block(model, A, B, epsilon, max_iter, batch_size)
        pts = (1.0 - alphas)[:, None] * A + alphas[:, None] * B
        np.clip(pts, lo, hi, out=pts)
        if progress is not None:
            progress(e, k)
        return pts, trunc

    if n_workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_block, blocks))
    else:
        results = [run_block(b) for b in blocks]

    if results:
        points = np.concatenate([r[0] for r in results])
        truncated = np.concatenate([r[1] for r in results])
    else:
        points = np.empty((0, data.n_features))
        truncated = np.empty(0, dtype=bool)
    pair_indices = np.stack([ai, bi], axis=1)

    if deduplicate and len(points):
        seg_len = np.linalg.norm(x1[bi] - x0[ai], axis=1)
        keep = _deduplicate(points, epsilon * seg_len)
        points, pair_indices, truncated = points[keep], pair_indices[keep], truncated[keep]

    return BoundaryPointSet(
        points=points,
        epsilon=epsilon,
        threshold_t=threshold_t,
        seed=seed,
        pair_indices=pair_indices,
        model_fingerprint=model_fingerprint(model),
        class0_correct=x0,
        class1_correct=x1,
        truncated=truncated,
        source="ssba",
    )


def grid_memory_estimate(n_features: int, resolution_r: int) -> int:
    """8 bytes per coordinate for the full lattice: 8 * n * R**n."""
    return 8 * n_features * resolution_r**n_features


def grid_boundary_points(
    model: Classifier,
    bounds: list[tuple[float, float]],
    resolution_r: int,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET,
) -> BoundaryPointSet:
    """Evaluate the full R**n lattice and emit midpoints of label-changing edges.

    Refuses before any allocation when the estimated lattice size exceeds the
    budget, raising MemoryBudgetError with the estimate.
    """
    if resolution_r < 2:
        raise ValueError(f"resolution_r must be >= 2, got {resolution_r}")
    n = len(bounds)
    estimate = grid_memory_estimate(n, resolution_r)
    if estimate > memory_budget_bytes:
        raise MemoryBudgetError(estimate, memory_budget_bytes)
    axes = [np.linspace(lo, hi, resolution_r) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack(mesh, axis=-1).reshape(-1, n)
    labels = _predict_chunked(model, grid, 65536)
    shape = (resolution_r,) * n
    lab = labels.reshape(shape)
    pts = grid.reshape(shape + (n,))
    spacing = [(hi - lo) / (resolution_r - 1) for lo, hi in bounds]

    mids = []
    for d in range(n):
        sl_a = tuple(slice(None, -1) if i == d else slice(None) for i in range(n))
        sl_b = tuple(slice(1, None) if i == d else slice(None) for i in range(n))
        changed = lab[sl_a] != lab[sl_b]
        if changed.any():
            mids.append(0.5 * (pts[sl_a][changed] + pts[sl_b][changed]))
    points = np.concatenate(mids) if mids else np.empty((0, n))

    return BoundaryPointSet(
        points=points,
        epsilon=float(max(spacing)),
        threshold_t=resolution_r**n,
        seed=0,
        pair_indices=np.empty((0, 2), dtype=np.int64),
        model_fingerprint=model_fingerprint(model),
        class0_correct=np.empty((0, n)),
        class1_correct=np.empty((0, n)),
        truncated=np.zeros(points.shape[0], dtype=bool),
        source="grid",
    )


def crossing_point(
    model: Classifier,
    d_star,
    toward,
    y: int,
    eps0: float = 1e-3,
    max_doublings: int = 40,
) -> np.ndarray:
    """First point past d_star (toward an opposite-class point) that flips f.

    Steps by eps0, doubling the step until the prediction differs from y; the
    step is capped at ``toward`` itself, which flips by assumption.
    """
    if not eps0 > 0:
        raise ValueError("eps0 must be > 0")
    if max_doublings < 0:
        raise ValueError("max_doublings must be >= 0")
    d_star = np.asarray(d_star, dtype=np.float64).reshape(-1)
    toward = np.asarray(toward, dtype=np.float64).reshape(-1)
    u = toward - d_star
    length = float(np.linalg.norm(u))
    if length == 0.0:
        raise CrossingFailedError("d_star and toward coincide; no direction to step in")
    for k in range(max_doublings + 1):
        step = min(eps0 * 2.0**k, length)
        p = d_star + (step / length) * u
        if model.predict(p) != y:
            return p
        if step >= length:
            break
    raise CrossingFailedError(
        f"no prediction flip within {max_doublings} doublings of eps0={eps0}"
    )


def boundary_fingerprint(path) -> str:
    """Hash of a persisted boundary file, for change detection in tests/CI."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
