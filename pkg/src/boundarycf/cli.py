"""Batch command-line entry point mirroring the service capabilities.

Subcommands: gen-data, train, boundary, explain, evaluate, bench, serve.
Values resolve as flag > environment variable > config file > default; the
config file is INI-style with fixed sections and keys (unknown ones are
rejected).  Every run prints the seed it used.  Exit codes: 0 success,
1 error, 2 usage, 3 grid memory-budget refusal.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation
from .boundary import (
    DEFAULT_EPSILON,
    DEFAULT_MEMORY_BUDGET,
    BoundaryPointSet,
    MemoryBudgetError,
    generate_boundary_points,
    grid_boundary_points,
)
from .datasets import (
    Dataset,
    Feature,
    FeatureSchema,
    feature_bounds,
    load_csv,
    make_classification,
    save_csv,
)
from .explain import ConstraintSet, Explainer
from .models import FAMILIES, load_model, save_model, train

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MEMORY_BUDGET = 3

ENV_PREFIX = "BOUNDARYCF_"

_PLAIN_KEYS = {
    "dataset": {
        "csv", "label_column", "categorical", "n_samples", "n_features", "class_sep", "seed",
    },
    "model": {
        "family", "learning_rate", "epochs", "regularization", "hidden_sizes",
        "n_trees", "max_depth", "batch_size", "seed",
    },
    "boundary": {
        "threshold_t", "epsilon", "seed", "batch_size", "deduplicate",
        "method", "resolution", "memory_budget",
    },
    "explain": {
        "query", "eps0", "categorical_tolerance", "samples_per_dim", "immutable", "seed",
    },
    "evaluate": {"n_queries", "seed"},
    "bench": {
        "feature_counts", "methods", "thresholds", "n_samples", "class_sep", "repeats", "seed",
    },
    "output": {"dir", "data", "model", "boundary", "results", "bench_table", "bench_csv"},
    "serve": {"host", "port", "artifact_dir", "job_workers", "seed"},
}
_PREFIX_KEYS = {
    "explain": ("equality.", "lower.", "upper.", "delta."),
    "bench": ("grid_resolution.",),
}


class ConfigError(ValueError):
    pass


def load_run_config(path) -> dict:
    """Parse and validate the INI config; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    config: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _PLAIN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        config[section] = {}
        for key, value in parser.items(section):
            plain = key in _PLAIN_KEYS[section]
            prefixed = any(key.startswith(p) for p in _PREFIX_KEYS.get(section, ()))
            if not plain and not prefixed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            config[section][key] = value
    return config


def _resolve(flag_value, env_name: str | None, cfg_value, default, cast):
    if flag_value is not None:
        return cast(flag_value)
    if env_name is not None:
        env = os.environ.get(ENV_PREFIX + env_name)
        if env is not None:
            return cast(env)
    if cfg_value is not None:
        return cast(cfg_value)
    return default


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _int_list(text) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip() != ""]


def _float_list(text) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip() != ""]


def _out_path(args, config, key: str, default_name: str | None) -> Path | None:
    explicit = getattr(args, "out", None)
    if explicit:
        return Path(explicit)
    out = config.get("output", {})
    directory = _resolve(args.output_dir, "OUTPUT_DIR", out.get("dir"), ".", str)
    name = out.get(key, default_name)
    if name is None:
        return None
    return Path(directory) / name


def _seed(args, config, section: str) -> int:
    return _resolve(args.seed, "SEED", config.get(section, {}).get("seed"), 0, int)


def _load_dataset(args, config) -> Dataset:
    cfg = config.get("dataset", {})
    csv_path = getattr(args, "data", None) or cfg.get("csv")
    if csv_path:
        label_column = _resolve(
            getattr(args, "label_column", None), None, cfg.get("label_column"), "label", str
        )
        categorical = [
            s.strip() for s in cfg.get("categorical", "").split(",") if s.strip()
        ]
        header = Path(csv_path).open().readline().strip().split(",")
        names = [h for h in header if h != label_column]
        feats = tuple(
            Feature(name=n, kind="categorical", category_count=64)
            if n in categorical
            else Feature(name=n)
            for n in names
        )
        return load_csv(csv_path, FeatureSchema(feats), label_column)
    n_samples = _resolve(getattr(args, "n_samples", None), None, cfg.get("n_samples"), 2000, int)
    n_features = _resolve(getattr(args, "n_features", None), None, cfg.get("n_features"), 2, int)
    class_sep = _resolve(getattr(args, "class_sep", None), None, cfg.get("class_sep"), 2.0, float)
    seed = _seed(args, {"dataset": cfg}, "dataset")
    return make_classification(n_samples, n_features, class_sep, seed)


def _constraints_from(args, config) -> ConstraintSet:
    cfg = config.get("explain", {})
    immutable = set()
    raw_immutable = getattr(args, "immutable", None) or cfg.get("immutable")
    if raw_immutable:
        immutable = set(_int_list(raw_immutable))
    maps = {"equality": {}, "lower": {}, "upper": {}, "delta": {}}
    for key, value in cfg.items():
        for kind in maps:
            if key.startswith(kind + "."):
                maps[kind][int(key.split(".", 1)[1])] = float(value)
    for kind, flag in (
        ("equality", "equality"), ("lower", "lower"), ("upper", "upper"), ("delta", "delta")
    ):
        for item in getattr(args, flag, None) or []:
            idx, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"--{flag} expects INDEX=VALUE, got {item!r}")
            maps[kind][int(idx)] = float(val)
    return ConstraintSet(
        immutable=frozenset(immutable),
        equalities=maps["equality"],
        lower_bounds=maps["lower"],
        upper_bounds=maps["upper"],
        delta_fractions=maps["delta"],
    )


def _model_hyperparameters(args, config) -> dict:
    cfg = config.get("model", {})
    hp: dict = {}
    casts = {
        "learning_rate": float, "epochs": int, "regularization": float,
        "n_trees": int, "max_depth": int, "batch_size": int,
    }
    for key, cast in casts.items():
        value = getattr(args, key, None)
        if value is None:
            value = cfg.get(key)
        if value is not None:
            hp[key] = cast(value)
    hidden = getattr(args, "hidden_sizes", None) or cfg.get("hidden_sizes")
    if hidden is not None:
        hp["hidden_sizes"] = _int_list(hidden)
    return hp


# ----------------------------------------------------------------- commands


def cmd_gen_data(args, config) -> int:
    seed = _seed(args, config, "dataset")
    cfg = config.get("dataset", {})
    n_samples = _resolve(args.n_samples, None, cfg.get("n_samples"), 2000, int)
    n_features = _resolve(args.n_features, None, cfg.get("n_features"), 2, int)
    class_sep = _resolve(args.class_sep, None, cfg.get("class_sep"), 2.0, float)
    print(f"seed: {seed}")
    data = make_classification(n_samples, n_features, class_sep, seed)
    path = _out_path(args, config, "data", "data.csv")
    save_csv(data, path)
    print(f"wrote {data.n_samples} x {data.n_features} dataset to {path}")
    return EXIT_OK


def cmd_train(args, config) -> int:
    seed = _seed(args, config, "model")
    print(f"seed: {seed}")
    data = _load_dataset(args, config)
    family = _resolve(args.family, None, config.get("model", {}).get("family"), "logistic", str)
    if family not in FAMILIES:
        raise ConfigError(f"unknown model family {family!r}; choose from {sorted(FAMILIES)}")
    hp = _model_hyperparameters(args, config)
    model, report = train(family, data, seed=seed, **hp)
    path = _out_path(args, config, "model", "model.json")
    save_model(model, path)
    print(f"family: {family}")
    print(f"train_accuracy: {report.train_accuracy}")
    print(f"wrote model to {path}")
    return EXIT_OK


def cmd_boundary(args, config) -> int:
    cfg = config.get("boundary", {})
    seed = _seed(args, config, "boundary")
    print(f"seed: {seed}")
    model = load_model(args.model)
    data = _load_dataset(args, config)
    method = _resolve(args.method, None, cfg.get("method"), "ssba", str)
    path = _out_path(args, config, "boundary", "boundary.bcfb")
    if method == "grid":
        resolution = _resolve(args.resolution, None, cfg.get("resolution"), 100, int)
        budget = _resolve(
            args.memory_budget, "MEMORY_BUDGET", cfg.get("memory_budget"),
            DEFAULT_MEMORY_BUDGET, int,
        )
        bset = grid_boundary_points(model, feature_bounds(data), resolution, budget)
    elif method == "ssba":
        threshold_t = _resolve(args.threshold_t, None, cfg.get("threshold_t"), 10_000, int)
        epsilon = _resolve(args.epsilon, None, cfg.get("epsilon"), DEFAULT_EPSILON, float)
        batch_size = _resolve(args.batch_size, None, cfg.get("batch_size"), 1000, int)
        dedup = _bool(cfg.get("deduplicate", False))
        threads = _resolve(args.threads, "THREADS", None, 1, int)
        bset = generate_boundary_points(
            model, data, threshold_t, epsilon=epsilon, seed=seed,
            batch_size=batch_size, deduplicate=dedup, n_workers=threads,
        )
    else:
        raise ConfigError(f"unknown boundary method {method!r}")
    bset.save(path)
    print(f"boundary points: {len(bset)}")
    print(f"wrote boundary set to {path}")
    return EXIT_OK


def cmd_explain(args, config) -> int:
    cfg = config.get("explain", {})
    seed = _seed(args, config, "explain")
    print(f"seed: {seed}")
    model = load_model(args.model)
    bset = BoundaryPointSet.load(args.boundary, model)
    raw_query = args.query or cfg.get("query")
    if raw_query is None:
        raise ConfigError("explain needs a query (--query or [explain] query)")
    query = np.array(_float_list(raw_query))
    constraints = _constraints_from(args, config)
    eps0 = _resolve(args.eps0, None, cfg.get("eps0"), 1e-3, float)
    tolerance = _resolve(None, None, cfg.get("categorical_tolerance"), 0.5, float)
    samples = _resolve(None, None, cfg.get("samples_per_dim"), 50, int)
    explainer = Explainer(model, bset, categorical_tolerance=tolerance)
    result = explainer.explain(
        query, constraints, eps0=eps0, samples_per_dim=samples, seed=seed
    )
    record = result.to_record()
    text = json.dumps(record, indent=2)
    print(text)
    path = _out_path(args, config, "results", None)
    if path is not None:
        Path(path).write_text(text + "\n")
        print(f"wrote result to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args, config) -> int:
    cfg = config.get("evaluate", {})
    seed = _seed(args, config, "evaluate")
    print(f"seed: {seed}")
    model = load_model(args.model)
    bset = BoundaryPointSet.load(args.boundary, model)
    data = _load_dataset(args, config)
    n_queries = _resolve(args.n_queries, None, cfg.get("n_queries"), 20, int)
    queries, ids = evaluation.sample_class1_queries(data, n_queries, seed)
    explainer = Explainer(model, bset, schema=data.schema)
    results = [explainer.explain(q) for q in queries]
    report = evaluation.mean_unconstrained_distance(results, [int(i) for i in ids])
    print(f"mean_distance: {report.mean_distance}")
    print(f"sample_count: {report.sample_count}")
    path = _out_path(args, config, "results", None)
    if path is not None:
        evaluation.metric_to_csv(report, path)
        print(f"wrote per-sample distances to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args, config) -> int:
    cfg = config.get("bench", {})
    seed = _seed(args, config, "bench")
    print(f"seed: {seed}")
    resolutions = {
        int(k.split(".", 1)[1]): int(v)
        for k, v in cfg.items()
        if k.startswith("grid_resolution.")
    }
    budget = _resolve(
        args.memory_budget, "MEMORY_BUDGET", None, DEFAULT_MEMORY_BUDGET, int
    )
    bench_config = evaluation.BenchmarkConfig(
        n_samples=_resolve(None, None, cfg.get("n_samples"), 2000, int),
        feature_counts=tuple(
            _int_list(_resolve(args.feature_counts, None, cfg.get("feature_counts"), "2,10,50", str))
        ),
        methods=tuple(
            s.strip()
            for s in _resolve(args.methods, None, cfg.get("methods"), "ssba,grid", str).split(",")
        ),
        thresholds=tuple(
            _int_list(_resolve(args.thresholds, None, cfg.get("thresholds"), "10000", str))
        ),
        grid_resolutions=resolutions or {2: 100, 10: 10, 50: 10},
        class_sep=_resolve(None, None, cfg.get("class_sep"), 3.0, float),
        seed=seed,
        memory_budget_bytes=budget,
        repeats=_resolve(None, None, cfg.get("repeats"), 1, int),
    )
    records = evaluation.run_benchmark(
        bench_config, progress=lambda msg: print(f"running {msg}", file=sys.stderr)
    )
    table = evaluation.format_bench_table(records)
    print(table)
    out = config.get("output", {})
    directory = Path(_resolve(args.output_dir, "OUTPUT_DIR", out.get("dir"), ".", str))
    if out.get("bench_table"):
        (directory / out["bench_table"]).write_text(table + "\n")
    if out.get("bench_csv"):
        evaluation.bench_to_csv(records, directory / out["bench_csv"])
    if any(r.error for r in records):
        return EXIT_MEMORY_BUDGET
    return EXIT_OK


def cmd_serve(args, config) -> int:
    import uvicorn

    from .service import create_app

    cfg = config.get("serve", {})
    host = _resolve(args.host, "HOST", cfg.get("host"), "127.0.0.1", str)
    port = _resolve(args.port, "PORT", cfg.get("port"), 8000, int)
    artifacts = _resolve(args.artifacts, "ARTIFACTS", cfg.get("artifact_dir"), None, str)
    workers = _resolve(None, None, cfg.get("job_workers"), 2, int)
    seed = _seed(args, config, "serve")
    print(f"seed: {seed}")
    app = create_app(artifact_dir=artifacts, job_workers=workers)
    uvicorn.run(app, host=host, port=port)
    return EXIT_OK


# -------------------------------------------------------------------- parser


def _add_common_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # registered on the main parser and again on every subparser so the flags
    # work in either position; SUPPRESS keeps subparsers from clobbering
    # values already parsed before the subcommand
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument(
        "--config", default=default, help=f"INI config file (env {ENV_PREFIX}CONFIG)"
    )
    parser.add_argument(
        "--seed", type=int, default=default, help=f"seed override (env {ENV_PREFIX}SEED)"
    )
    parser.add_argument(
        "--threads", type=int, default=default,
        help=f"worker threads for generation (env {ENV_PREFIX}THREADS)",
    )
    parser.add_argument(
        "--output-dir", default=default,
        help=f"directory for artifacts (env {ENV_PREFIX}OUTPUT_DIR)",
    )
    parser.add_argument(
        "--memory-budget", type=int, default=default,
        help=f"grid memory budget in bytes (env {ENV_PREFIX}MEMORY_BUDGET)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundarycf",
        description="Counterfactual explanations from a discretized decision boundary.",
    )
    _add_common_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(*a, **kw):
        p = sub.add_parser(*a, **kw)
        _add_common_flags(p, suppress=True)
        return p

    p = add_parser("gen-data", help="generate a synthetic dataset CSV")
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--n-features", type=int, dest="n_features")
    p.add_argument("--class-sep", type=float, dest="class_sep")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen_data)

    p = add_parser("train", help="train a model and save it as JSON")
    p.add_argument("--data", help="CSV dataset path (else [dataset] config)")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--regularization", type=float)
    p.add_argument("--hidden-sizes", dest="hidden_sizes")
    p.add_argument("--n-trees", type=int, dest="n_trees")
    p.add_argument("--max-depth", type=int, dest="max_depth")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_train)

    p = add_parser("boundary", help="generate and save boundary points")
    p.add_argument("--model", required=True, help="saved model JSON path")
    p.add_argument("--data", help="CSV dataset path (else [dataset] config)")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--method", choices=("ssba", "grid"))
    p.add_argument("--threshold-t", type=int, dest="threshold_t")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_boundary)

    p = add_parser("explain", help="explain one query against a boundary file")
    p.add_argument("--model", required=True)
    p.add_argument("--boundary", required=True, help="saved boundary file path")
    p.add_argument("--query", help="comma-separated feature values")
    p.add_argument("--eps0", type=float)
    p.add_argument("--immutable", help="comma-separated feature indices")
    p.add_argument("--equality", action="append", metavar="I=V")
    p.add_argument("--lower", action="append", metavar="I=V")
    p.add_argument("--upper", action="append", metavar="I=V")
    p.add_argument("--delta", action="append", metavar="I=V")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_explain)

    p = add_parser("evaluate", help="mean distance metric over class-1 queries")
    p.add_argument("--model", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--data", help="CSV dataset path (else [dataset] config)")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--n-queries", type=int, dest="n_queries")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_evaluate)

    p = add_parser("bench", help="runtime/count benchmark across methods")
    p.add_argument("--feature-counts", dest="feature_counts")
    p.add_argument("--methods")
    p.add_argument("--thresholds")
    p.set_defaults(fn=cmd_bench)

    p = add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", help=f"bind host (env {ENV_PREFIX}HOST)")
    p.add_argument("--port", type=int, help=f"bind port (env {ENV_PREFIX}PORT)")
    p.add_argument("--artifacts", help=f"artifact directory (env {ENV_PREFIX}ARTIFACTS)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config_path = _resolve(args.config, "CONFIG", None, None, str)
        config = load_run_config(config_path) if config_path else {}
        return args.fn(args, config)
    except MemoryBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MEMORY_BUDGET
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
