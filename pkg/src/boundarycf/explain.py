"""Nearest feasible counterfactuals from a boundary point set, under constraints.

Feasibility filtering keeps boundary points that pin immutable and categorical
features to the query (within a tolerance, since boundary coordinates are
fractional), match equalities within the same tolerance, respect closed
inequality bounds, and stay inside any explicitly requested delta boxes.  When
nothing survives, the bounded fallback returns the point of the query's delta
box closest to the boundary; it does not flip the prediction but shows how far
the box is from doing so.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryPointSet, CrossingFailedError, crossing_point
from .datasets import FeatureSchema
from .kdtree import NearestIndex
from .models import Classifier

DEFAULT_DELTA_FRACTION = 0.2
DEFAULT_CATEGORICAL_TOLERANCE = 0.5
DEFAULT_EPS0 = 1e-3
DEFAULT_SAMPLES_PER_DIM = 50


@dataclass(frozen=True)
class ConstraintSet:
    """User constraints on a counterfactual.

    ``delta_fractions`` entries both restrict feasible boundary points to
    |p_i - query_i| <= fraction * |query_i| and size the fallback box; features
    without an entry get the default 0.2 fraction for the fallback box only.
    """

    immutable: frozenset = frozenset()
    equalities: dict = field(default_factory=dict)
    lower_bounds: dict = field(default_factory=dict)
    upper_bounds: dict = field(default_factory=dict)
    delta_fractions: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "immutable", frozenset(int(i) for i in self.immutable))
        for name in ("equalities", "lower_bounds", "upper_bounds", "delta_fractions"):
            cleaned = {int(k): float(v) for k, v in getattr(self, name).items()}
            object.__setattr__(self, name, cleaned)
        for maps in (self.equalities, self.lower_bounds, self.upper_bounds, self.delta_fractions):
            for i in maps:
                if i < 0:
                    raise ValueError(f"feature index must be >= 0, got {i}")
        for i in self.immutable:
            if i < 0:
                raise ValueError(f"feature index must be >= 0, got {i}")
        for i, lo in self.lower_bounds.items():
            hi = self.upper_bounds.get(i)
            if hi is not None and lo > hi:
                raise ValueError(f"feature {i}: lower bound {lo} exceeds upper bound {hi}")
        clash = self.immutable & set(self.delta_fractions)
        if clash:
            raise ValueError(
                f"features {sorted(clash)} are both immutable and delta-constrained"
            )
        for i, frac in self.delta_fractions.items():
            if frac < 0:
                raise ValueError(f"feature {i}: delta fraction must be >= 0, got {frac}")

    def is_empty(self) -> bool:
        return not (
            self.immutable
            or self.equalities
            or self.lower_bounds
            or self.upper_bounds
            or self.delta_fractions
        )

    def max_index(self) -> int:
        indices = set(self.immutable)
        for maps in (self.equalities, self.lower_bounds, self.upper_bounds, self.delta_fractions):
            indices.update(maps)
        return max(indices, default=-1)

    def validate_for(self, n_features: int) -> None:
        if self.max_index() >= n_features:
            raise ValueError(
                f"constraint references feature {self.max_index()}, "
                f"but instances have {n_features} features"
            )

    def cache_key(self) -> tuple:
        return (
            tuple(sorted(self.immutable)),
            tuple(sorted(self.equalities.items())),
            tuple(sorted(self.lower_bounds.items())),
            tuple(sorted(self.upper_bounds.items())),
            tuple(sorted(self.delta_fractions.items())),
        )

    def delta_fraction(self, i: int) -> float:
        return self.delta_fractions.get(i, DEFAULT_DELTA_FRACTION)

    def to_dict(self) -> dict:
        return {
            "immutable": sorted(self.immutable),
            "equalities": {str(k): v for k, v in sorted(self.equalities.items())},
            "lower_bounds": {str(k): v for k, v in sorted(self.lower_bounds.items())},
            "upper_bounds": {str(k): v for k, v in sorted(self.upper_bounds.items())},
            "delta_fractions": {str(k): v for k, v in sorted(self.delta_fractions.items())},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ConstraintSet":
        known = {"immutable", "equalities", "lower_bounds", "upper_bounds", "delta_fractions"}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown constraint keys: {sorted(unknown)}")
        return cls(
            immutable=frozenset(payload.get("immutable", ())),
            equalities=payload.get("equalities", {}),
            lower_bounds=payload.get("lower_bounds", {}),
            upper_bounds=payload.get("upper_bounds", {}),
            delta_fractions=payload.get("delta_fractions", {}),
        )

    def status_on(
        self,
        point: np.ndarray,
        query: np.ndarray,
        categorical_tolerance: float,
        schema: FeatureSchema | None = None,
    ) -> tuple[list[str], list[str]]:
        """Describe which constraints the point satisfies; returns (ok, violated)."""
        ok: list[str] = []
        bad: list[str] = []

        def mark(label: str, holds: bool):
            (ok if holds else bad).append(label)

        cats = set(schema.categorical_indices) if schema is not None else set()
        for i in sorted(self.immutable | cats):
            kind = "immutable" if i in self.immutable else "categorical"
            mark(f"{kind}[{i}]", abs(point[i] - query[i]) <= categorical_tolerance)
        for i, v in sorted(self.equalities.items()):
            mark(f"equality[{i}]={v}", abs(point[i] - v) <= categorical_tolerance)
        for i, v in sorted(self.lower_bounds.items()):
            mark(f"lower[{i}]>={v}", point[i] >= v)
        for i, v in sorted(self.upper_bounds.items()):
            mark(f"upper[{i}]<={v}", point[i] <= v)
        for i, frac in sorted(self.delta_fractions.items()):
            mark(f"delta[{i}]<={frac}", abs(point[i] - query[i]) <= frac * abs(query[i]))
        return ok, bad


@dataclass(frozen=True)
class CounterfactualResult:
    """Outcome of an explanation request.

    ``boundary_point`` is the nearest feasible boundary point in feasible mode
    and the in-box fallback point otherwise; ``distance`` is always the L2
    distance from the query to that point.  ``crossed`` is the small step past
    the boundary that actually flips the prediction (feasible mode only; absent
    when the crossing search failed, flagged by ``crossing_failed``).
    """

    query: np.ndarray
    boundary_point: np.ndarray
    crossed: np.ndarray | None
    mode: str
    distance: float
    satisfied_constraints: list
    violated_constraints: list
    crossing_failed: bool = False

    def __post_init__(self):
        if self.mode not in ("feasible", "bounded_fallback"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "bounded_fallback" and self.crossed is not None:
            raise ValueError("bounded_fallback results carry no crossed point")

    @property
    def actionable_point(self) -> np.ndarray:
        return self.crossed if self.crossed is not None else self.boundary_point

    def to_record(self, feature_names: list[str] | None = None) -> dict:
        names = feature_names or [f"f{i}" for i in range(self.query.shape[0])]
        after = self.actionable_point
        return {
            "query": [float(v) for v in self.query],
            "boundary_point": [float(v) for v in self.boundary_point],
            "crossed": None if self.crossed is None else [float(v) for v in self.crossed],
            "mode": self.mode,
            "distance": float(self.distance),
            "crossing_failed": self.crossing_failed,
            "deltas": [
                {"feature": names[i], "before": float(self.query[i]), "after": float(after[i])}
                for i in range(self.query.shape[0])
            ],
            "satisfied_constraints": list(self.satisfied_constraints),
            "violated_constraints": list(self.violated_constraints),
        }


def build_index(boundary_set: BoundaryPointSet) -> NearestIndex:
    if len(boundary_set) == 0:
        raise ValueError("cannot index an empty boundary set")
    return NearestIndex(boundary_set.points)


def filter_feasible(
    boundary_set: BoundaryPointSet,
    constraints: ConstraintSet,
    query,
    categorical_tolerance: float = DEFAULT_CATEGORICAL_TOLERANCE,
    schema: FeatureSchema | None = None,
) -> BoundaryPointSet:
    """Subset of boundary points satisfying the constraints for this query.

    Immutable and categorical features must match the query within the
    tolerance, equalities must hold within the same tolerance, lower/upper
    bounds are closed comparisons, and explicit delta fractions bound
    |p_i - query_i| by fraction * |query_i|.  An empty result signals fallback.
    """
    if categorical_tolerance < 0:
        raise ValueError("categorical_tolerance must be >= 0")
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    points = boundary_set.points
    constraints.validate_for(points.shape[1])
    mask = np.ones(points.shape[0], dtype=bool)
    cats = set(schema.categorical_indices) if schema is not None else set()
    for i in sorted(constraints.immutable | cats):
        mask &= np.abs(points[:, i] - query[i]) <= categorical_tolerance
    for i, v in constraints.equalities.items():
        mask &= np.abs(points[:, i] - v) <= categorical_tolerance
    for i, v in constraints.lower_bounds.items():
        mask &= points[:, i] >= v
    for i, v in constraints.upper_bounds.items():
        mask &= points[:, i] <= v
    for i, frac in constraints.delta_fractions.items():
        mask &= np.abs(points[:, i] - query[i]) <= frac * abs(query[i])
    return boundary_set.subset(np.flatnonzero(mask))


def _fallback_box(
    query: np.ndarray,
    constraints: ConstraintSet,
    schema: FeatureSchema | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed per-feature search intervals for the bounded fallback.

    Immutable and categorical features collapse to the query value; equality
    features collapse to the equality value clamped into the delta box; the
    rest get the delta box intersected with any inequality bounds.  The box
    always wins on conflict so the result stays inside it; dropped bounds show
    up later in the constraint re-verification.
    """
    n = query.shape[0]
    cats = set(schema.categorical_indices) if schema is not None else set()
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        if i in constraints.immutable or i in cats:
            lo[i] = hi[i] = query[i]
            continue
        delta = constraints.delta_fraction(i) * abs(query[i])
        lo[i], hi[i] = query[i] - delta, query[i] + delta
        if i in constraints.equalities:
            lo[i] = hi[i] = min(max(constraints.equalities[i], lo[i]), hi[i])
            continue
        if i in constraints.lower_bounds:
            lo[i] = max(lo[i], min(constraints.lower_bounds[i], hi[i]))
        if i in constraints.upper_bounds:
            hi[i] = min(hi[i], max(constraints.upper_bounds[i], lo[i]))
    return lo, hi


def bounded_counterfactual(
    query,
    constraints: ConstraintSet,
    index: NearestIndex,
    samples_per_dim: int = DEFAULT_SAMPLES_PER_DIM,
    seed: int = 0,
    schema: FeatureSchema | None = None,
) -> tuple[np.ndarray, float]:
    """Point of the query's delta box closest to the boundary, plus that gap.

    Candidates are the box projections of every boundary point (the projection
    of d is the box minimizer of distance to d, so their best is the exact box
    optimum) plus samples_per_dim * n_mutable seeded uniform box samples.
    Returns (box point, L2 distance from it to its nearest boundary point).
    """
    if samples_per_dim < 1:
        raise ValueError("samples_per_dim must be >= 1")
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    if query.shape[0] != index.n_features:
        raise ValueError(
            f"query has {query.shape[0]} features, index has {index.n_features}"
        )
    constraints.validate_for(query.shape[0])
    cats = set(schema.categorical_indices) if schema is not None else set()
    mutable = [
        i
        for i in range(query.shape[0])
        if i not in constraints.immutable and i not in cats
    ]
    if not mutable:
        raise ValueError("all features are immutable; the fallback box is empty")
    lo, hi = _fallback_box(query, constraints, schema)

    boundary = index.points
    projected = np.clip(boundary, lo, hi)
    gaps = np.sqrt(np.sum((projected - boundary) ** 2, axis=1))
    best = int(np.argmin(gaps))
    best_point, best_gap = projected[best].copy(), float(gaps[best])

    rng = np.random.default_rng(seed)
    samples = lo + rng.random((samples_per_dim * len(mutable), query.shape[0])) * (hi - lo)
    for s in samples:
        _, d = index.query(s)
        if d < best_gap:
            best_point, best_gap = s.copy(), d
    return best_point, best_gap


def _crossing_target(
    feasible: BoundaryPointSet, nn_idx: int, query: np.ndarray, y: int
) -> np.ndarray:
    if feasible.has_pairs():
        if y == 0:
            return feasible.endpoint_class1(nn_idx)
        return feasible.endpoint_class0(nn_idx)
    # grid sets record no pairs; extend the query -> d* ray past the boundary
    d_star = feasible.points[nn_idx]
    u = d_star - query
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        u = np.ones_like(d_star)
        norm = float(np.linalg.norm(u))
    return d_star + u / norm * max(norm, 1.0)


def _explain_with(
    model: Classifier,
    boundary_set: BoundaryPointSet,
    feasible: BoundaryPointSet,
    index: NearestIndex | None,
    full_index: NearestIndex | None,
    query: np.ndarray,
    constraints: ConstraintSet,
    eps0: float,
    categorical_tolerance: float,
    schema: FeatureSchema | None,
    samples_per_dim: int,
    seed: int,
    max_doublings: int,
) -> CounterfactualResult:
    y = model.predict(query)
    if len(feasible):
        nn_idx, distance = index.query(query)
        d_star = feasible.points[nn_idx]
        crossed = None
        crossing_failed = False
        try:
            toward = _crossing_target(feasible, nn_idx, query, y)
            crossed = crossing_point(model, d_star, toward, y, eps0, max_doublings)
        except CrossingFailedError:
            crossing_failed = True
        checked = crossed if crossed is not None else d_star
        ok, bad = constraints.status_on(checked, query, categorical_tolerance, schema)
        return CounterfactualResult(
            query=query,
            boundary_point=d_star.copy(),
            crossed=crossed,
            mode="feasible",
            distance=float(distance),
            satisfied_constraints=ok,
            violated_constraints=bad,
            crossing_failed=crossing_failed,
        )
    if full_index is None:
        full_index = build_index(boundary_set)
    x_prime, _ = bounded_counterfactual(
        query, constraints, full_index, samples_per_dim, seed, schema
    )
    ok, bad = constraints.status_on(x_prime, query, categorical_tolerance, schema)
    return CounterfactualResult(
        query=query,
        boundary_point=x_prime,
        crossed=None,
        mode="bounded_fallback",
        distance=float(np.linalg.norm(query - x_prime)),
        satisfied_constraints=ok,
        violated_constraints=bad,
    )


def explain(
    model: Classifier,
    boundary_set: BoundaryPointSet,
    query,
    constraints: ConstraintSet | None = None,
    eps0: float = DEFAULT_EPS0,
    categorical_tolerance: float = DEFAULT_CATEGORICAL_TOLERANCE,
    schema: FeatureSchema | None = None,
    samples_per_dim: int = DEFAULT_SAMPLES_PER_DIM,
    seed: int = 0,
    max_doublings: int = 40,
) -> CounterfactualResult:
    """Nearest feasible counterfactual for one query, or the bounded fallback.

    Filters the boundary set for feasibility, finds the exact nearest survivor,
    and steps past it toward the opposite-class endpoint of its generating pair
    until the prediction flips.  With no survivors, returns the bounded
    fallback instead (categorical and immutable features pinned exactly).
    """
    if len(boundary_set) == 0:
        raise ValueError("boundary set is empty")
    constraints = constraints if constraints is not None else ConstraintSet()
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    if query.shape[0] != boundary_set.n_features:
        raise ValueError(
            f"query has {query.shape[0]} features, boundary set has {boundary_set.n_features}"
        )
    constraints.validate_for(query.shape[0])
    feasible = filter_feasible(boundary_set, constraints, query, categorical_tolerance, schema)
    index = build_index(feasible) if len(feasible) else None
    return _explain_with(
        model,
        boundary_set,
        feasible,
        index,
        None,
        query,
        constraints,
        eps0,
        categorical_tolerance,
        schema,
        samples_per_dim,
        seed,
        max_doublings,
    )


class Explainer:
    """Bundles model + boundary set and caches filtered indexes across queries.

    The filter outcome depends on the constraints and on the query only through
    the features they pin, so the cache key combines both; unconstrained use
    builds one index for all queries.  Safe for concurrent explain calls.
    """

    def __init__(
        self,
        model: Classifier,
        boundary_set: BoundaryPointSet,
        schema: FeatureSchema | None = None,
        categorical_tolerance: float = DEFAULT_CATEGORICAL_TOLERANCE,
    ):
        if len(boundary_set) == 0:
            raise ValueError("boundary set is empty")
        self.model = model
        self.boundary_set = boundary_set
        self.schema = schema
        self.categorical_tolerance = categorical_tolerance
        self._cache: dict = {}
        self._full_index: NearestIndex | None = None
        self._lock = threading.Lock()

    def _pinning_key(self, constraints: ConstraintSet, query: np.ndarray) -> tuple:
        cats = set(self.schema.categorical_indices) if self.schema is not None else set()
        touched = sorted(constraints.immutable | cats | set(constraints.delta_fractions))
        return (
            constraints.cache_key(),
            tuple((i, float(query[i])) for i in touched),
        )

    def _feasible_for(self, constraints: ConstraintSet, query: np.ndarray):
        key = self._pinning_key(constraints, query)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        feasible = filter_feasible(
            self.boundary_set, constraints, query, self.categorical_tolerance, self.schema
        )
        index = build_index(feasible) if len(feasible) else None
        with self._lock:
            self._cache.setdefault(key, (feasible, index))
            return self._cache[key]

    def _get_full_index(self) -> NearestIndex:
        with self._lock:
            if self._full_index is None:
                self._full_index = build_index(self.boundary_set)
            return self._full_index

    def explain(
        self,
        query,
        constraints: ConstraintSet | None = None,
        eps0: float = DEFAULT_EPS0,
        samples_per_dim: int = DEFAULT_SAMPLES_PER_DIM,
        seed: int = 0,
        max_doublings: int = 40,
    ) -> CounterfactualResult:
        constraints = constraints if constraints is not None else ConstraintSet()
        query = np.asarray(query, dtype=np.float64).reshape(-1)
        if query.shape[0] != self.boundary_set.n_features:
            raise ValueError(
                f"query has {query.shape[0]} features, "
                f"boundary set has {self.boundary_set.n_features}"
            )
        constraints.validate_for(query.shape[0])
        feasible, index = self._feasible_for(constraints, query)
        full_index = None if len(feasible) else self._get_full_index()
        return _explain_with(
            self.model,
            self.boundary_set,
            feasible,
            index,
            full_index,
            query,
            constraints,
            eps0,
            self.categorical_tolerance,
            self.schema,
            samples_per_dim,
            seed,
            max_doublings,
        )
