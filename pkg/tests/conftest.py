import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import scone

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def two_cluster_dataset(n_per_cluster=10, gap=100.0, seed=0, n_views=2):
    """Two tight, far-apart clusters; the same instances sit in the same
    cluster in every view.  Returns (dataset, cluster_assignment)."""
    rng = np.random.default_rng(seed)
    assignment = np.repeat([0, 1], n_per_cluster)
    views = []
    for _ in range(n_views):
        centers = np.array([[0.0, 0.0], [gap, gap]])
        views.append(centers[assignment] + rng.normal(scale=0.5, size=(2 * n_per_cluster, 2)))
    return scone.MultiViewDataset(tuple(views)), assignment


@pytest.fixture
def small_benchmark():
    """Reduced synthetic benchmark: 170 normals plus 4 of each anomaly kind."""
    return scone.make_benchmark_dataset(
        "varied", seed=0, n_normal=170, n_attribute=4, n_class=4, n_class_attribute=4
    )
