"""Distance metrics over explanation results and a generation benchmark harness.

The unconstrained metric averages query-to-boundary-point distances over
class-1 queries; the constrained metric averages each fallback point's exact
distance to the boundary.  The benchmark times boundary generation only
(training excluded) across feature counts and methods, recording grid memory
refusals as error rows instead of raising.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .boundary import (
    DEFAULT_MEMORY_BUDGET,
    MemoryBudgetError,
    generate_boundary_points,
    grid_boundary_points,
)
from .datasets import Dataset, feature_bounds, make_classification
from .explain import CounterfactualResult
from .kdtree import NearestIndex
from .models import train


@dataclass(frozen=True)
class MetricReport:
    mean_distance: float
    sample_count: int
    mode: str
    per_sample: tuple

    def __post_init__(self):
        if self.mode not in ("unconstrained", "constrained"):
            raise ValueError(f"unknown metric mode {self.mode!r}")
        if self.sample_count != len(self.per_sample):
            raise ValueError("sample_count must equal the number of per-sample entries")


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n_features: int
    threshold_t: int
    wall_time: float
    points_generated: int
    error: str | None = None
    wall_time_std: float | None = None

    def __post_init__(self):
        if self.method not in ("ssba", "grid"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.points_generated > self.threshold_t:
            raise ValueError("points_generated cannot exceed threshold_t")


def mean_unconstrained_distance(
    results: list[CounterfactualResult], ids: list | None = None
) -> MetricReport:
    """Mean L2 distance from each query to its nearest boundary point.

    All results must be feasible-mode; each contributes its reported distance,
    so a singleton report equals that query's explain distance exactly.
    """
    if not results:
        raise ValueError("no results to average")
    for r in results:
        if r.mode != "feasible":
            raise ValueError("unconstrained metric requires feasible-mode results only")
    if ids is None:
        ids = list(range(len(results)))
    per_sample = tuple((ids[i], float(r.distance)) for i, r in enumerate(results))
    mean = sum(d for _, d in per_sample) / len(per_sample)
    return MetricReport(
        mean_distance=mean,
        sample_count=len(per_sample),
        mode="unconstrained",
        per_sample=per_sample,
    )


def mean_bounded_distance(
    bounded: list[tuple[np.ndarray, NearestIndex]], ids: list | None = None
) -> MetricReport:
    """Mean exact distance from each bounded fallback point to the boundary."""
    if not bounded:
        raise ValueError("no fallback points to average")
    if ids is None:
        ids = list(range(len(bounded)))
    per_sample = []
    for i, (x_prime, index) in enumerate(bounded):
        _, dist = index.query(np.asarray(x_prime, dtype=np.float64))
        per_sample.append((ids[i], float(dist)))
    per_sample = tuple(per_sample)
    mean = sum(d for _, d in per_sample) / len(per_sample)
    return MetricReport(
        mean_distance=mean,
        sample_count=len(per_sample),
        mode="constrained",
        per_sample=per_sample,
    )


def sample_class1_queries(data: Dataset, k: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """k i.i.d. uniform draws from the class-1 rows; returns (rows, row indices)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pool = np.flatnonzero(data.labels == 1)
    if pool.size == 0:
        raise ValueError("dataset has no class-1 rows")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(pool, size=k, replace=True)
    return data.rows[chosen], chosen


@dataclass(frozen=True)
class BenchmarkConfig:
    n_samples: int = 2000
    feature_counts: tuple = (2, 10, 50)
    methods: tuple = ("ssba", "grid")
    thresholds: tuple = (10_000,)
    grid_resolutions: dict = field(default_factory=lambda: {2: 100, 10: 10, 50: 10})
    class_sep: float = 3.0
    epsilon: float = 1e-3
    seed: int = 0
    batch_size: int = 1000
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    model_family: str = "logistic"
    repeats: int = 1

    def __post_init__(self):
        if any(t < 1 for t in self.thresholds):
            raise ValueError("thresholds must be >= 1")
        bad = [m for m in self.methods if m not in ("ssba", "grid")]
        if bad:
            raise ValueError(f"unknown benchmark methods: {bad}")
        if any(n < 1 for n in self.feature_counts):
            raise ValueError("feature counts must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def _timed(fn, repeats: int):
    times = []
    value = None
    err = None
    for _ in range(repeats):
        start = time.perf_counter()
        try:
            value = fn()
            err = None
        except MemoryBudgetError as exc:
            err = exc
        times.append(time.perf_counter() - start)
        if err is not None:
            break
    std = statistics.stdev(times) if len(times) > 1 else None
    return value, err, times[0], std


def run_benchmark(config: BenchmarkConfig, progress=None) -> list[BenchRecord]:
    """Train once per feature count, then time each requested generation run.

    Runs serially to keep timings honest; ``progress`` receives a description
    string before each timed run.
    """
    records: list[BenchRecord] = []
    for n in config.feature_counts:
        data = make_classification(config.n_samples, n, config.class_sep, config.seed)
        model, _ = train(config.model_family, data, seed=config.seed)
        for method in config.methods:
            if method == "ssba":
                for t in config.thresholds:
                    if progress is not None:
                        progress(f"ssba n={n} T={t}")
                    result, _, wall, std = _timed(
                        lambda t=t: generate_boundary_points(
                            model,
                            data,
                            threshold_t=t,
                            epsilon=config.epsilon,
                            seed=config.seed,
                            batch_size=config.batch_size,
                        ),
                        config.repeats,
                    )
                    records.append(
                        BenchRecord(
                            method="ssba",
                            n_features=n,
                            threshold_t=t,
                            wall_time=wall,
                            points_generated=len(result),
                            wall_time_std=std,
                        )
                    )
            else:
                r = config.grid_resolutions.get(n, 10)
                if progress is not None:
                    progress(f"grid n={n} R={r}")
                bounds = feature_bounds(data)
                result, err, wall, std = _timed(
                    lambda: grid_boundary_points(
                        model, bounds, r, config.memory_budget_bytes
                    ),
                    config.repeats,
                )
                if err is not None:
                    records.append(
                        BenchRecord(
                            method="grid",
                            n_features=n,
                            threshold_t=r**n,
                            wall_time=wall,
                            points_generated=0,
                            error=f"memory budget exceeded: needs about {err.estimated_bytes} bytes",
                        )
                    )
                else:
                    records.append(
                        BenchRecord(
                            method="grid",
                            n_features=n,
                            threshold_t=r**n,
                            wall_time=wall,
                            points_generated=len(result),
                            wall_time_std=std,
                        )
                    )
    return records


def format_bench_table(records: list[BenchRecord]) -> str:
    """Aligned text table: method, n, point limit, runtime, point count, note."""
    headers = ["Method", "n", "Limit for Boundary Points", "Runtime (s)", "Number", "Note"]
    rows = [
        [
            r.method,
            str(r.n_features),
            str(r.threshold_t),
            f"{r.wall_time:.3f}",
            str(r.points_generated),
            r.error or "",
        ]
        for r in records
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)


def bench_to_csv(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "n_features", "threshold_t", "wall_time", "points_generated",
             "wall_time_std", "error"]
        )
        for r in records:
            writer.writerow(
                [r.method, r.n_features, r.threshold_t, repr(r.wall_time),
                 r.points_generated,
                 "" if r.wall_time_std is None else repr(r.wall_time_std),
                 r.error or ""]
            )


def metric_to_csv(report: MetricReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "distance"])
        for qid, dist in report.per_sample:
            writer.writerow([qid, repr(dist)])
        writer.writerow(["mean", repr(report.mean_distance)])


def export_plot_data(
    path,
    data: Dataset | None = None,
    boundary_points: np.ndarray | None = None,
    query: np.ndarray | None = None,
    cfe: np.ndarray | None = None,
    max_boundary: int = 5000,
    seed: int = 0,
) -> None:
    """Point clouds for external plotting: kind, class label, then coordinates.

    Kinds: ``data`` rows carry their class label, ``boundary`` rows a capped
    seeded sample of the boundary points, plus single ``query``/``cfe`` rows.
    """
    n = None
    for arr in (data.rows if data is not None else None, boundary_points, query, cfe):
        if arr is not None:
            n = np.asarray(arr).reshape(-1, np.asarray(arr).shape[-1]).shape[1]
            break
    if n is None:
        raise ValueError("nothing to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "label"] + [f"f{i}" for i in range(n)])
        if data is not None:
            for row, label in zip(data.rows, data.labels):
                writer.writerow(["data", int(label)] + [repr(float(v)) for v in row])
        if boundary_points is not None and len(boundary_points):
            pts = np.asarray(boundary_points)
            if pts.shape[0] > max_boundary:
                rng = np.random.default_rng(seed)
                keep = np.sort(rng.choice(pts.shape[0], size=max_boundary, replace=False))
                pts = pts[keep]
            for row in pts:
                writer.writerow(["boundary", ""] + [repr(float(v)) for v in row])
        if query is not None:
            writer.writerow(["query", ""] + [repr(float(v)) for v in np.asarray(query).reshape(-1)])
        if cfe is not None:
            writer.writerow(["cfe", ""] + [repr(float(v)) for v in np.asarray(cfe).reshape(-1)])
