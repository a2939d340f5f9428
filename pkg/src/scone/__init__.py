"""Multi-view anomaly detection with subsampled spherical consistent
neighborhoods.

An ensemble of small random subsamples defines, in every view, adaptive
spherical neighborhoods around the sampled instances.  An instance is
consistent when it falls inside the same samples' neighborhoods across all
views; its anomaly score is one minus the fraction of neighborhoods that
contain it.  Scoring is linear in the dataset size.
"""

from .core import (
    DataError,
    EnsembleModel,
    Label,
    LabelVector,
    MultiViewDataset,
    SampleSet,
    SconeError,
    SconeParams,
    ScoreVector,
    UsageError,
    Variant,
    check_fingerprint,
    minmax_scale_views,
    validate_params,
)
from .ensemble import (
    anomaly_scores,
    co_membership_similarity,
    consistency_indicators,
    fit,
    score_dataset,
)
from .evaluation import auc, per_type_auc, roc_points, runtime_benchmark
from .neighborhoods import (
    BinaryEmbedding,
    binary_embedding,
    compute_radii,
    consistent_membership,
    knn_among_samples,
    spherical_membership,
    voronoi_membership,
)
from .oracle import (
    consistent_neighbors,
    cross_view_neighborhood_counts,
    estimate_membership_probability,
    naive_score,
    proportion_consistent,
)
from .synthetic import (
    ClusterConfig,
    default_cluster_config,
    inject_attribute_anomalies,
    inject_class_anomalies,
    inject_class_attribute_anomalies,
    make_benchmark_dataset,
    make_clustered_dataset,
    split_views,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "EnsembleModel",
    "Label",
    "LabelVector",
    "MultiViewDataset",
    "SampleSet",
    "SconeError",
    "SconeParams",
    "ScoreVector",
    "UsageError",
    "Variant",
    "check_fingerprint",
    "minmax_scale_views",
    "validate_params",
    "anomaly_scores",
    "co_membership_similarity",
    "consistency_indicators",
    "fit",
    "score_dataset",
    "auc",
    "per_type_auc",
    "roc_points",
    "runtime_benchmark",
    "BinaryEmbedding",
    "binary_embedding",
    "compute_radii",
    "consistent_membership",
    "knn_among_samples",
    "spherical_membership",
    "voronoi_membership",
    "consistent_neighbors",
    "cross_view_neighborhood_counts",
    "estimate_membership_probability",
    "naive_score",
    "proportion_consistent",
    "ClusterConfig",
    "default_cluster_config",
    "inject_attribute_anomalies",
    "inject_class_anomalies",
    "inject_class_attribute_anomalies",
    "make_benchmark_dataset",
    "make_clustered_dataset",
    "split_views",
    "__version__",
]
