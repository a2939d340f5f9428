"""Per-view neighborhood geometry.

A subsample of psi instances defines, in every view, psi spherical
neighborhoods: sample i's radius is the distance to its nearest other
sample, so spheres grow in sparse regions and shrink in dense ones.  An
instance belongs to sample i's spherical neighborhood when it lies inside
the sphere (boundary inclusive) and sample i is among the instance's k
nearest samples.  The multi-view indicator is the product of the per-view
memberships: a single inconsistent view zeroes it.

All distances are exact Euclidean; psi is small enough that brute force is
both exact and fast.  Nearest-sample ties are broken by ascending sample
position, which makes every operation deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DataError,
    MultiViewDataset,
    SampleSet,
    SconeError,
    SconeParams,
    UsageError,
    Variant,
    _frozen,
)

__all__ = [
    "BinaryEmbedding",
    "compute_radii",
    "knn_among_samples",
    "spherical_membership",
    "voronoi_membership",
    "consistent_membership",
    "binary_embedding",
]


def _distances(x: np.ndarray, points: np.ndarray) -> np.ndarray:
    # Must reduce over the feature axis exactly like the batched scorer in
    # ensemble.py, or boundary comparisons could disagree between the two.
    return np.sqrt(np.square(points - x).sum(axis=-1))


def compute_radii(sample_points: np.ndarray) -> np.ndarray:
    """Adaptive radius of each sampled point in one view.

    Parameters
    ----------
    sample_points : (psi, d) array
        Feature vectors of the sampled instances in the view.

    Returns
    -------
    (psi,) array
        radius[i] = distance from point i to its nearest other sample.
        Coincident samples get radius 0; no epsilon inflation is applied.
    """
    pts = np.asarray(sample_points, dtype=np.float64)
    if pts.ndim != 2:
        raise UsageError("BAD_SAMPLE_POINTS", f"expected a 2-D array, got {pts.shape}")
    if pts.shape[0] < 2:
        raise UsageError(
            "FEWER_THAN_TWO_SAMPLES", "adaptive radii need at least two samples"
        )
    dist = np.sqrt(np.square(pts[:, None, :] - pts[None, :, :]).sum(axis=-1))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def knn_among_samples(x: np.ndarray, sample_points: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k samples nearest to ``x``, nearest first.

    Distance ties are broken by ascending sample position.
    """
    pts = np.asarray(sample_points, dtype=np.float64)
    if k < 1:
        raise UsageError("K_TOO_SMALL", f"k must be >= 1, got {k}")
    if k > pts.shape[0]:
        raise UsageError(
            "K_EXCEEDS_PSI", f"k={k} exceeds the {pts.shape[0]} available samples"
        )
    dist = _distances(np.asarray(x, dtype=np.float64), pts)
    order = np.argsort(dist, kind="stable")
    return order[:k]


def spherical_membership(
    x: np.ndarray,
    sample_pos: int,
    sample_points: np.ndarray,
    radii: np.ndarray,
    k: int,
) -> int:
    """Spherical-neighborhood indicator for one view.

    Returns 1 iff ``x`` lies within sample ``sample_pos``'s radius
    (inclusive) and that sample is one of the k nearest samples to ``x``.
    ``radii`` must come from :func:`compute_radii` on the same points.
    """
    x = np.asarray(x, dtype=np.float64)
    pts = np.asarray(sample_points, dtype=np.float64)
    dist = np.sqrt(np.square(x - pts[sample_pos]).sum())
    if dist > radii[sample_pos]:
        return 0
    return int(sample_pos in knn_among_samples(x, pts, k))


def voronoi_membership(x: np.ndarray, sample_pos: int, sample_points: np.ndarray) -> int:
    """Nearest-sample-cell indicator: 1 iff ``sample_pos`` is the single
    nearest sample to ``x`` (ties by ascending position).  No radius
    constraint, so the cells tile the whole space."""
    pts = np.asarray(sample_points, dtype=np.float64)
    dist = _distances(np.asarray(x, dtype=np.float64), pts)
    order = np.argsort(dist, kind="stable")
    return int(order[0] == sample_pos)


def _check_member(dataset: MultiViewDataset, member: SampleSet) -> None:
    if member.n_views != dataset.n_views:
        raise DataError(
            "FINGERPRINT_MISMATCH",
            f"sample set has radii for {member.n_views} views, dataset has {dataset.n_views}",
        )
    if member.indices.max() >= dataset.n_instances:
        raise DataError(
            "FINGERPRINT_MISMATCH",
            "sample indices exceed the dataset's instance count",
        )


def consistent_membership(
    dataset: MultiViewDataset,
    x_index: int,
    member: SampleSet,
    sample_pos: int,
    params: SconeParams,
) -> int:
    """Multi-view indicator: product over views of the per-view membership.

    1 iff ``x`` is inside sample ``sample_pos``'s neighborhood in every
    view; a single failing view annihilates the product.
    """
    _check_member(dataset, member)
    for v in range(dataset.n_views):
        pts = dataset.views[v][member.indices]
        x = dataset.views[v][x_index]
        if params.variant is Variant.VORONOI:
            inside = voronoi_membership(x, sample_pos, pts)
        else:
            inside = spherical_membership(
                x, sample_pos, pts, member.radii[v], params.effective_k
            )
        if inside == 0:
            return 0
    return 1


@dataclass(frozen=True, eq=False)
class BinaryEmbedding:
    """Per-view binary membership pattern of a single instance.

    ``bits[v][i]`` is the view-v membership indicator for sample i, so each
    row carries at most k ones (exactly one for the Voronoi rule).  Normal
    instances light up the same columns in every row; instances far from
    all samples map to the all-zero matrix.
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise SconeError("BAD_EMBEDDING", "bits must be a 2-D matrix")
        if bits.size and bits.max() > 1:
            raise SconeError("BAD_EMBEDDING", "bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryEmbedding):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


def binary_embedding(
    dataset: MultiViewDataset,
    x_index: int,
    member: SampleSet,
    params: SconeParams,
) -> BinaryEmbedding:
    """Full (V, psi) membership matrix of one instance for one member.

    Column-wise AND of column i reproduces :func:`consistent_membership`
    for sample i.
    """
    _check_member(dataset, member)
    psi = member.psi
    bits = np.zeros((dataset.n_views, psi), dtype=np.uint8)
    for v in range(dataset.n_views):
        pts = dataset.views[v][member.indices]
        x = dataset.views[v][x_index]
        dist = _distances(x, pts)
        order = np.argsort(dist, kind="stable")
        if params.variant is Variant.VORONOI:
            bits[v, order[0]] = 1
        else:
            near = order[: params.effective_k]
            bits[v, near] = dist[near] <= member.radii[v][near]
    return BinaryEmbedding(bits)
