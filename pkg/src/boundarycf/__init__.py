"""Counterfactual explanations from a discretized decision boundary.

Approximate a binary classifier's decision boundary with many discrete points
by bisecting segments between opposite-class training pairs, then answer
"what is the nearest change that flips the prediction, subject to my
constraints?" with exact nearest-neighbor search over the feasible points.
"""

from .boundary import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    DEFAULT_MEMORY_BUDGET,
    BisectionResult,
    BoundaryPointSet,
    CrossingFailedError,
    MemoryBudgetError,
    NoCorrectRepresentativesError,
    alpha_binary_search,
    crossing_point,
    generate_boundary_points,
    grid_boundary_points,
    grid_memory_estimate,
    select_correct,
)
from .datasets import (
    CATEGORICAL,
    CONTINUOUS,
    CsvFormatError,
    Dataset,
    Feature,
    FeatureSchema,
    feature_bounds,
    load_csv,
    make_classification,
    save_csv,
    split,
    standardize,
    toy_points,
)
from .evaluation import (
    BenchmarkConfig,
    BenchRecord,
    MetricReport,
    bench_to_csv,
    export_plot_data,
    format_bench_table,
    mean_bounded_distance,
    mean_unconstrained_distance,
    metric_to_csv,
    run_benchmark,
    sample_class1_queries,
)
from .explain import (
    DEFAULT_CATEGORICAL_TOLERANCE,
    DEFAULT_DELTA_FRACTION,
    DEFAULT_EPS0,
    ConstraintSet,
    CounterfactualResult,
    Explainer,
    bounded_counterfactual,
    build_index,
    explain,
    filter_feasible,
)
from .kdtree import NearestIndex
from .models import (
    Classifier,
    LinearSVMModel,
    LogisticModel,
    MLPModel,
    RandomForestModel,
    TrainingDivergedError,
    TrainReport,
    load_model,
    model_fingerprint,
    save_model,
    train,
    train_linear_svm,
    train_logistic,
    train_mlp,
    train_random_forest,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "BenchmarkConfig",
    "BisectionResult",
    "BoundaryPointSet",
    "CATEGORICAL",
    "CONTINUOUS",
    "Classifier",
    "ConstraintSet",
    "CounterfactualResult",
    "CrossingFailedError",
    "CsvFormatError",
    "DEFAULT_CATEGORICAL_TOLERANCE",
    "DEFAULT_DELTA_FRACTION",
    "DEFAULT_EPS0",
    "DEFAULT_EPSILON",
    "DEFAULT_MAX_ITER",
    "DEFAULT_MEMORY_BUDGET",
    "Dataset",
    "Explainer",
    "Feature",
    "FeatureSchema",
    "LinearSVMModel",
    "LogisticModel",
    "MLPModel",
    "MemoryBudgetError",
    "MetricReport",
    "NearestIndex",
    "NoCorrectRepresentativesError",
    "RandomForestModel",
    "TrainReport",
    "TrainingDivergedError",
    "alpha_binary_search",
    "bench_to_csv",
    "bounded_counterfactual",
    "build_index",
    "crossing_point",
    "explain",
    "export_plot_data",
    "feature_bounds",
    "filter_feasible",
    "format_bench_table",
    "generate_boundary_points",
    "grid_boundary_points",
    "grid_memory_estimate",
    "load_csv",
    "load_model",
    "make_classification",
    "mean_bounded_distance",
    "mean_unconstrained_distance",
    "metric_to_csv",
    "model_fingerprint",
    "run_benchmark",
    "sample_class1_queries",
    "save_csv",
    "save_model",
    "select_correct",
    "split",
    "standardize",
    "toy_points",
    "train",
    "train_linear_svm",
    "train_logistic",
    "train_mlp",
    "train_random_forest",
]
