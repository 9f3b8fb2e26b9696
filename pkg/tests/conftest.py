import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import boundarycf as bcf

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def blob_data():
    return bcf.make_classification(600, 2, 3.0, seed=11)


@pytest.fixture(scope="session")
def blob_model(blob_data):
    model, report = bcf.train_logistic(blob_data, epochs=400)
    assert report.train_accuracy > 0.9
    return model


@pytest.fixture(scope="session")
def blob_boundary(blob_model, blob_data):
    return bcf.generate_boundary_points(blob_model, blob_data, threshold_t=4000, seed=3)


def scan_nearest(points: np.ndarray, query: np.ndarray) -> tuple[int, float]:
    """Independent nearest-neighbor oracle with the (distance, index) tie rule."""
    d2 = np.sum((points - query) ** 2, axis=1)
    best = np.min(d2)
    idx = int(np.min(np.flatnonzero(d2 == best)))
    return idx, float(np.sqrt(best))


@pytest.fixture(scope="session")
def linear_scan_nn():
    return scan_nearest
