"""HTTP facade over the pipeline: datasets, models, boundary jobs, explanations.

All state lives in memory for the lifetime of the server, except boundary sets,
which are also persisted to files in the artifact directory.  Boundary
generation runs as an async job on a bounded worker pool with polled progress;
every other endpoint is synchronous.  Artifacts referenced by a running job
cannot be deleted.
"""

from __future__ import annotations

import hashlib
import itertools
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException

from .boundary import BoundaryPointSet, generate_boundary_points
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
)
from .explain import ConstraintSet, Explainer
from .models import FAMILIES, train

BOUNDARY_POINTS_CAP = 5000


class SessionState:
    """Server-run-scoped artifact store with stable ids and a job pool."""

    def __init__(self, artifact_dir: str | None = None, job_workers: int = 2):
        self.artifact_dir = Path(artifact_dir or tempfile.mkdtemp(prefix="boundarycf-"))
        self.artifact_dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.RLock()
        self.datasets: dict[str, Dataset] = {}
        self.models: dict[str, dict] = {}
        self.boundaries: dict[str, dict] = {}
        self.presets: dict[str, ConstraintSet] = {}
        self.pool = ThreadPoolExecutor(max_workers=job_workers)
        self._counters = {
            "ds": itertools.count(1),
            "mdl": itertools.count(1),
            "bnd": itertools.count(1),
            "cst": itertools.count(1),
        }

    def new_id(self, kind: str) -> str:
        return f"{kind}-{next(self._counters[kind])}"

    def shutdown(self):
        self.pool.shutdown(wait=False, cancel_futures=True)


def _require(state_dict: dict, key: str, what: str):
    item = state_dict.get(key)
    if item is None:
        raise HTTPException(status_code=404, detail=f"unknown {what} id {key!r}")
    return item


def _parse_schema(features: list, n_expected: int | None = None) -> FeatureSchema:
    feats = []
    for spec in features:
        if not isinstance(spec, dict) or "name" not in spec:
            raise HTTPException(status_code=400, detail="each feature needs at least a name")
        kind = spec.get("kind", CONTINUOUS)
        if kind not in (CONTINUOUS, CATEGORICAL):
            raise HTTPException(status_code=400, detail=f"unknown feature kind {kind!r}")
        feats.append(
            Feature(
                name=spec["name"],
                kind=kind,
                category_count=spec.get("category_count", 2 if kind == CATEGORICAL else None),
            )
        )
    if n_expected is not None and len(feats) != n_expected:
        raise HTTPException(
            status_code=400,
            detail=f"schema lists {len(feats)} features, data has {n_expected}",
        )
    return FeatureSchema(tuple(feats))


def _dataset_summary(ds_id: str, data: Dataset) -> dict:
    c0, c1 = data.class_counts()
    return {
        "id": ds_id,
        "n_samples": data.n_samples,
        "n_features": data.n_features,
        "feature_names": data.schema.names,
        "categorical_indices": data.schema.categorical_indices,
        "bounds": [[lo, hi] for lo, hi in feature_bounds(data)],
        "class_counts": [c0, c1],
    }


def _run_boundary_job(state: SessionState, job: dict) -> None:
    try:
        with state.lock:
            job["status"] = "running"
        model = state.models[job["model_id"]]["model"]
        data = state.datasets[job["dataset_id"]]

        def progress(done, total):
            with state.lock:
                job["pairs_done"] = max(job["pairs_done"], int(done))
                job["pairs_total"] = int(total)

        bset = generate_boundary_points(
            model,
            data,
            threshold_t=job["threshold_t"],
            epsilon=job["epsilon"],
            seed=job["seed"],
            batch_size=job["batch_size"],
            progress=progress,
        )
        path = state.artifact_dir / f"{job['id']}.boundary"
        bset.save(path)
        sha = hashlib.sha256(path.read_bytes()).hexdigest()
        explainer = Explainer(model, bset, schema=data.schema) if len(bset) else None
        with state.lock:
            job.update(
                status="done",
                count=len(bset),
                file=str(path),
                file_sha256=sha,
                boundary_set=bset,
                explainer=explainer,
            )
    except Exception as exc:  # surfaced through the status endpoint
        with state.lock:
            job.update(status="error", error=str(exc))


def create_app(artifact_dir: str | None = None, job_workers: int = 2) -> FastAPI:
    state = SessionState(artifact_dir=artifact_dir, job_workers=job_workers)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        state.shutdown()

    app = FastAPI(title="boundarycf", version="0.1.0", lifespan=lifespan)
    app.state.session = state

    # ------------------------------------------------------------- datasets

    @app.post("/datasets")
    def create_dataset(body: dict = Body(...)):
        if ("generator" in body) == ("csv" in body):
            raise HTTPException(
                status_code=400, detail="provide exactly one of 'generator' or 'csv'"
            )
        if "generator" in body:
            gen = body["generator"]
            try:
                data = make_classification(
                    int(gen.get("n_samples", 2000)),
                    int(gen.get("n_features", 2)),
                    float(gen.get("class_sep", 2.0)),
                    int(gen.get("seed", 0)),
                )
            except (ValueError, TypeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        else:
            label_column = body.get("label_column", "label")
            with tempfile.NamedTemporaryFile(
                "w", suffix=".csv", dir=state.artifact_dir, delete=False
            ) as fh:
                fh.write(body["csv"])
                tmp_path = fh.name
            try:
                if "features" in body:
                    schema = _parse_schema(body["features"])
                else:
                    header = body["csv"].splitlines()[0].split(",") if body["csv"] else []
                    names = [h.strip() for h in header if h.strip() != label_column]
                    schema = FeatureSchema.continuous_features(names)
                data = load_csv(tmp_path, schema, label_column)
            except CsvFormatError as exc:
                raise HTTPException(
                    status_code=422,
                    detail={"message": str(exc), "row": exc.row, "column": exc.column},
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail={"message": str(exc)})
            finally:
                Path(tmp_path).unlink(missing_ok=True)
        with state.lock:
            ds_id = state.new_id("ds")
            state.datasets[ds_id] = data
        return _dataset_summary(ds_id, data)

    @app.get("/datasets/{ds_id}/points")
    def dataset_points(ds_id: str):
        with state.lock:
            data = _require(state.datasets, ds_id, "dataset")
        return {
            "points": data.rows.tolist(),
            "labels": data.labels.tolist(),
            "feature_names": data.schema.names,
            "bounds": [[lo, hi] for lo, hi in feature_bounds(data)],
        }

    @app.delete("/datasets/{ds_id}", status_code=204)
    def delete_dataset(ds_id: str):
        with state.lock:
            _require(state.datasets, ds_id, "dataset")
            busy = any(
                job["dataset_id"] == ds_id and job["status"] in ("pending", "running")
                for job in state.boundaries.values()
            )
            if busy:
                raise HTTPException(
                    status_code=409, detail="dataset is referenced by a running boundary job"
                )
            del state.datasets[ds_id]

    # --------------------------------------------------------------- models

    @app.post("/models")
    def train_model(body: dict = Body(...)):
        ds_id = body.get("dataset_id")
        family = body.get("family")
        if ds_id is None or family is None:
            raise HTTPException(status_code=400, detail="dataset_id and family are required")
        if family not in FAMILIES:
            raise HTTPException(
                status_code=400,
                detail=f"unknown model family {family!r}; choose from {sorted(FAMILIES)}",
            )
        with state.lock:
            data = _require(state.datasets, ds_id, "dataset")
        try:
            model, report = train(family, data, **body.get("hyperparameters", {}))
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with state.lock:
            mdl_id = state.new_id("mdl")
            state.models[mdl_id] = {"model": model, "dataset_id": ds_id, "report": report}
        return {
            "id": mdl_id,
            "family": family,
            "dataset_id": ds_id,
            "report": {
                "train_accuracy": report.train_accuracy,
                "epochs_or_trees": report.epochs_or_trees,
                "final_loss": report.final_loss,
            },
        }

    @app.delete("/models/{mdl_id}", status_code=204)
    def delete_model(mdl_id: str):
        with state.lock:
            _require(state.models, mdl_id, "model")
            busy = any(
                job["model_id"] == mdl_id and job["status"] in ("pending", "running")
                for job in state.boundaries.values()
            )
            if busy:
                raise HTTPException(
                    status_code=409, detail="model is referenced by a running boundary job"
                )
            del state.models[mdl_id]

    # ------------------------------------------------------------- boundary

    @app.post("/boundary", status_code=202)
    def generate_boundary(body: dict = Body(...)):
        mdl_id = body.get("model_id")
        if mdl_id is None:
            raise HTTPException(status_code=400, detail="model_id is required")
        with state.lock:
            entry = _require(state.models, mdl_id, "model")
            ds_id = body.get("dataset_id", entry["dataset_id"])
            _require(state.datasets, ds_id, "dataset")
        try:
            threshold_t = int(body.get("threshold_t", 10_000))
            epsilon = float(body.get("epsilon", 1e-3))
            seed = int(body.get("seed", 0))
            batch_size = int(body.get("batch_size", 1000))
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if threshold_t < 1:
            raise HTTPException(status_code=400, detail="threshold_t must be >= 1")
        if not 0.0 < epsilon < 1.0:
            raise HTTPException(status_code=400, detail="epsilon must lie in (0, 1)")
        if batch_size < 1:
            raise HTTPException(status_code=400, detail="batch_size must be >= 1")
        with state.lock:
            bnd_id = state.new_id("bnd")
            job = {
                "id": bnd_id,
                "status": "pending",
                "model_id": mdl_id,
                "dataset_id": ds_id,
                "threshold_t": threshold_t,
                "epsilon": epsilon,
                "seed": seed,
                "batch_size": batch_size,
                "pairs_done": 0,
                "pairs_total": 0,
                "count": None,
                "error": None,
            }
            state.boundaries[bnd_id] = job
        state.pool.submit(_run_boundary_job, state, job)
        return {"id": bnd_id, "status": "pending"}

    @app.get("/boundary/{bnd_id}/status")
    def boundary_status(bnd_id: str):
        with state.lock:
            job = _require(state.boundaries, bnd_id, "boundary")
            return {
                "id": bnd_id,
                "status": job["status"],
                "pairs_done": job["pairs_done"],
                "pairs_total": job["pairs_total"],
                "count": job["count"],
                "file": job.get("file"),
                "file_sha256": job.get("file_sha256"),
                "error": job["error"],
                "params": {
                    "model_id": job["model_id"],
                    "dataset_id": job["dataset_id"],
                    "threshold_t": job["threshold_t"],
                    "epsilon": job["epsilon"],
                    "seed": job["seed"],
                },
            }

    @app.get("/boundary/{bnd_id}/points")
    def boundary_points(bnd_id: str, cap: int = BOUNDARY_POINTS_CAP):
        with state.lock:
            job = _require(state.boundaries, bnd_id, "boundary")
            if job["status"] != "done":
                raise HTTPException(status_code=409, detail=f"boundary job is {job['status']}")
            bset: BoundaryPointSet = job["boundary_set"]
        cap = max(1, min(cap, BOUNDARY_POINTS_CAP))
        pts = bset.points
        capped = pts.shape[0] > cap
        if capped:
            rng = np.random.default_rng(bset.seed)
            keep = np.sort(rng.choice(pts.shape[0], size=cap, replace=False))
            pts = pts[keep]
        return {"points": pts.tolist(), "count_total": len(bset), "capped": capped}

    # ---------------------------------------------------------- constraints

    @app.post("/constraints")
    def create_preset(body: dict = Body(...)):
        try:
            cons = ConstraintSet.from_dict(body)
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with state.lock:
            cst_id = state.new_id("cst")
            state.presets[cst_id] = cons
        return {"id": cst_id, "constraints": cons.to_dict()}

    # -------------------------------------------------------------- explain

    @app.post("/explain")
    def explain_endpoint(body: dict = Body(...)):
        bnd_id = body.get("boundary_id")
        query = body.get("query")
        if bnd_id is None or query is None:
            raise HTTPException(status_code=400, detail="boundary_id and query are required")
        with state.lock:
            job = _require(state.boundaries, bnd_id, "boundary")
            if job["status"] != "done":
                raise HTTPException(status_code=409, detail=f"boundary job is {job['status']}")
            explainer: Explainer | None = job.get("explainer")
            data = state.datasets.get(job["dataset_id"])
        if explainer is None:
            raise HTTPException(status_code=409, detail="boundary set is empty")
        if "constraints_preset" in body:
            with state.lock:
                cons = _require(state.presets, body["constraints_preset"], "constraint preset")
        else:
            try:
                cons = ConstraintSet.from_dict(body.get("constraints", {}))
            except (ValueError, TypeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        try:
            q = np.asarray(query, dtype=np.float64).reshape(-1)
        except (TypeError, ValueError):
            raise HTTPException(status_code=400, detail="query must be a flat numeric array")
        n = explainer.boundary_set.n_features
        if q.shape[0] != n:
            raise HTTPException(
                status_code=400, detail=f"query has {q.shape[0]} features, expected {n}"
            )
        cats = set(explainer.schema.categorical_indices) if explainer.schema else set()
        if not [i for i in range(n) if i not in cons.immutable and i not in cats]:
            raise HTTPException(status_code=409, detail="no mutable features")
        try:
            result = explainer.explain(
                q,
                cons,
                eps0=float(body.get("eps0", 1e-3)),
                samples_per_dim=int(body.get("samples_per_dim", 50)),
                seed=int(body.get("seed", 0)),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        names = data.schema.names if data is not None else None
        return result.to_record(feature_names=names)

    return app


app = create_app()
