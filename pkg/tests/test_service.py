import hashlib
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from boundarycf.service import create_app

GOOD_CSV = "age,income,label\n30,50,0\n25,40,0\n58,90,1\n61,95,1\n"
BAD_CSV = "age,income,label\n30,50,0\nmany,40,0\n58,90,1\n"


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    app = create_app(artifact_dir=str(tmp_path_factory.mktemp("artifacts")))
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def dataset(client):
    r = client.post(
        "/datasets",
        json={"generator": {"n_samples": 300, "n_features": 2, "class_sep": 3.0, "seed": 1}},
    )
    assert r.status_code == 200
    return r.json()


@pytest.fixture(scope="module")
def model(client, dataset):
    r = client.post("/models", json={"dataset_id": dataset["id"], "family": "logistic"})
    assert r.status_code == 200
    return r.json()


def wait_done(client, bnd_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/boundary/{bnd_id}/status").json()
        if status["status"] in ("done", "error"):
            return status
        time.sleep(0.01)
    raise TimeoutError(f"boundary job {bnd_id} never finished")


@pytest.fixture(scope="module")
def boundary(client, model):
    r = client.post(
        "/boundary", json={"model_id": model["id"], "threshold_t": 800, "seed": 2}
    )
    assert r.status_code == 202
    status = wait_done(client, r.json()["id"])
    assert status["status"] == "done"
    return status


class TestDatasets:
    def test_generator_summary(self, dataset):
        assert dataset["n_samples"] == 300
        assert dataset["n_features"] == 2
        assert dataset["feature_names"] == ["x0", "x1"]
        assert dataset["class_counts"] == [150, 150]
        assert len(dataset["bounds"]) == 2

    def test_points_payload(self, client, dataset):
        r = client.get(f"/datasets/{dataset['id']}/points")
        assert r.status_code == 200
        body = r.json()
        assert len(body["points"]) == 300
        assert sorted(set(body["labels"])) == [0, 1]
        assert body["feature_names"] == ["x0", "x1"]

    def test_csv_upload(self, client):
        r = client.post("/datasets", json={"csv": GOOD_CSV})
        assert r.status_code == 200
        body = r.json()
        assert body["feature_names"] == ["age", "income"]
        assert body["class_counts"] == [2, 2]

    def test_csv_with_schema_marks_categoricals(self, client):
        csv_text = "color,size,label\n0,5,0\n1,6,0\n2,9,1\n0,10,1\n"
        r = client.post(
            "/datasets",
            json={
                "csv": csv_text,
                "features": [
                    {"name": "color", "kind": "categorical", "category_count": 3},
                    {"name": "size"},
                ],
            },
        )
        assert r.status_code == 200
        assert r.json()["categorical_indices"] == [0]

    def test_malformed_csv_points_at_cell(self, client):
        r = client.post("/datasets", json={"csv": BAD_CSV})
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["row"] == 2
        assert detail["column"] == "age"
        assert "many" in detail["message"]

    def test_exactly_one_source_required(self, client):
        assert client.post("/datasets", json={}).status_code == 400
        both = client.post(
            "/datasets", json={"csv": GOOD_CSV, "generator": {"n_samples": 10}}
        )
        assert both.status_code == 400

    def test_unknown_dataset_404(self, client):
        assert client.get("/datasets/ds-999/points").status_code == 404

    def test_delete_then_404(self, client):
        ds = client.post("/datasets", json={"csv": GOOD_CSV}).json()
        assert client.delete(f"/datasets/{ds['id']}").status_code == 204
        assert client.get(f"/datasets/{ds['id']}/points").status_code == 404


class TestModels:
    def test_training_report(self, model, dataset):
        assert model["family"] == "logistic"
        assert model["dataset_id"] == dataset["id"]
        assert model["report"]["train_accuracy"] > 0.9

    def test_training_is_deterministic(self, client, dataset):
        a = client.post("/models", json={"dataset_id": dataset["id"], "family": "svm"})
        b = client.post("/models", json={"dataset_id": dataset["id"], "family": "svm"})
        assert a.json()["report"] == b.json()["report"]

    def test_unknown_family_lists_choices(self, client, dataset):
        r = client.post("/models", json={"dataset_id": dataset["id"], "family": "xgboost"})
        assert r.status_code == 400
        assert "logistic" in r.json()["detail"]

    def test_bad_hyperparameters_rejected(self, client, dataset):
        r = client.post(
            "/models",
            json={
                "dataset_id": dataset["id"],
                "family": "logistic",
                "hyperparameters": {"epochs": -5},
            },
        )
        assert r.status_code == 400

    def test_missing_dataset_404(self, client):
        r = client.post("/models", json={"dataset_id": "ds-999", "family": "logistic"})
        assert r.status_code == 404


class TestBoundaryJobs:
    def test_job_completes_with_requested_count(self, boundary):
        assert boundary["count"] == 800
        assert boundary["pairs_done"] == boundary["pairs_total"] == 800
        assert boundary["params"]["threshold_t"] == 800

    def test_artifact_file_and_hash(self, boundary):
        path = Path(boundary["file"])
        assert path.exists()
        assert hashlib.sha256(path.read_bytes()).hexdigest() == boundary["file_sha256"]

    def test_same_seed_same_file_hash(self, client, model):
        hashes = []
        for _ in range(2):
            r = client.post(
                "/boundary", json={"model_id": model["id"], "threshold_t": 150, "seed": 7}
            )
            hashes.append(wait_done(client, r.json()["id"])["file_sha256"])
        assert hashes[0] == hashes[1]
        r = client.post(
            "/boundary", json={"model_id": model["id"], "threshold_t": 150, "seed": 8}
        )
        assert wait_done(client, r.json()["id"])["file_sha256"] != hashes[0]

    def test_points_endpoint_caps_output(self, client, boundary):
        full = client.get(f"/boundary/{boundary['id']}/points").json()
        assert full["count_total"] == 800
        assert len(full["points"]) == 800
        assert not full["capped"]
        small = client.get(f"/boundary/{boundary['id']}/points", params={"cap": 50}).json()
        assert small["capped"]
        assert len(small["points"]) == 50
        assert small["count_total"] == 800

    def test_parameter_validation(self, client, model):
        bad = [
            {"model_id": model["id"], "threshold_t": 0},
            {"model_id": model["id"], "epsilon": 2.0},
            {"model_id": model["id"], "batch_size": 0},
            {},
        ]
        for body in bad:
            assert client.post("/boundary", json=body).status_code == 400

    def test_unknown_ids_404(self, client):
        assert client.get("/boundary/bnd-999/status").status_code == 404
        assert client.post("/boundary", json={"model_id": "mdl-999"}).status_code == 404

    def test_delete_guard_while_job_runs(self, client, dataset):
        # a forest on many pairs is slow enough to observe the running state
        mdl = client.post(
            "/models",
            json={
                "dataset_id": dataset["id"],
                "family": "forest",
                "hyperparameters": {"n_trees": 40},
            },
        ).json()
        r = client.post(
            "/boundary", json={"model_id": mdl["id"], "threshold_t": 8000, "seed": 0}
        )
        bnd_id = r.json()["id"]
        blocked_ds = client.delete(f"/datasets/{dataset['id']}")
        blocked_mdl = client.delete(f"/models/{mdl['id']}")
        status = client.get(f"/boundary/{bnd_id}/status").json()["status"]
        if status in ("pending", "running"):
            assert blocked_ds.status_code == 409
            assert blocked_mdl.status_code == 409
        wait_done(client, bnd_id)
        assert client.delete(f"/models/{mdl['id']}").status_code == 204


class TestExplain:
    def test_feasible_record(self, client, dataset, boundary):
        points = client.get(f"/datasets/{dataset['id']}/points").json()
        query = next(
            p for p, y in zip(points["points"], points["labels"]) if y == 1
        )
        r = client.post("/explain", json={"boundary_id": boundary["id"], "query": query})
        assert r.status_code == 200
        body = r.json()
        assert body["mode"] == "feasible"
        assert not body["crossing_failed"]
        assert body["distance"] > 0
        assert [d["feature"] for d in body["deltas"]] == ["x0", "x1"]
        assert body["crossed"] is not None

    def test_constraints_inline(self, client, boundary):
        r = client.post(
            "/explain",
            json={
                "boundary_id": boundary["id"],
                "query": [0.0, 0.0],
                "constraints": {"immutable": [0]},
            },
        )
        assert r.status_code == 200
        body = r.json()
        # immutable features are held within the categorical tolerance
        assert abs(body["deltas"][0]["after"] - body["deltas"][0]["before"]) <= 0.5
        assert "immutable[0]" in body["satisfied_constraints"]

    def test_constraints_preset(self, client, boundary):
        preset = client.post("/constraints", json={"upper_bounds": {"1": 100.0}})
        assert preset.status_code == 200
        r = client.post(
            "/explain",
            json={
                "boundary_id": boundary["id"],
                "query": [0.0, 0.0],
                "constraints_preset": preset.json()["id"],
            },
        )
        assert r.status_code == 200
        assert any(s.startswith("upper[1]") for s in r.json()["satisfied_constraints"])

    def test_all_immutable_409(self, client, boundary):
        r = client.post(
            "/explain",
            json={
                "boundary_id": boundary["id"],
                "query": [0.0, 0.0],
                "constraints": {"immutable": [0, 1]},
            },
        )
        assert r.status_code == 409
        assert "no mutable features" in r.json()["detail"]

    def test_bad_inputs(self, client, boundary):
        assert (
            client.post("/explain", json={"boundary_id": "bnd-999", "query": [0, 0]})
        ).status_code == 404
        assert (
            client.post("/explain", json={"boundary_id": boundary["id"]})
        ).status_code == 400
        wrong_width = client.post(
            "/explain", json={"boundary_id": boundary["id"], "query": [0.0, 0.0, 0.0]}
        )
        assert wrong_width.status_code == 400
        bad_cons = client.post(
            "/explain",
            json={
                "boundary_id": boundary["id"],
                "query": [0.0, 0.0],
                "constraints": {"frozen": [0]},
            },
        )
        assert bad_cons.status_code == 400
        bad_query = client.post(
            "/explain", json={"boundary_id": boundary["id"], "query": ["a", "b"]}
        )
        assert bad_query.status_code == 400

    def test_explain_before_job_done_409(self, client, dataset):
        mdl = client.post(
            "/models",
            json={
                "dataset_id": dataset["id"],
                "family": "forest",
                "hyperparameters": {"n_trees": 40},
            },
        ).json()
        r = client.post(
            "/boundary", json={"model_id": mdl["id"], "threshold_t": 8000, "seed": 1}
        )
        bnd_id = r.json()["id"]
        early = client.post("/explain", json={"boundary_id": bnd_id, "query": [0.0, 0.0]})
        status = client.get(f"/boundary/{bnd_id}/status").json()["status"]
        if status in ("pending", "running"):
            assert early.status_code == 409
        wait_done(client, bnd_id)
        late = client.post("/explain", json={"boundary_id": bnd_id, "query": [0.0, 0.0]})
        assert late.status_code == 200
