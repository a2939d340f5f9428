"""Core data types for the spherical consistent-neighborhoods ensemble.

A multi-view dataset holds V real-valued feature matrices over the same N
instances; row i of every view describes the same underlying instance.  A
fitted ensemble is a collection of subsample sets with precomputed per-view
adaptive radii.  Scoring assigns each instance a consistency score in
[0, 1]; the anomaly score is its complement.

All types are immutable after construction (arrays are marked read-only)
and safe to share across threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

__all__ = [
    "SconeError",
    "UsageError",
    "DataError",
    "Label",
    "Variant",
    "MultiViewDataset",
    "SconeParams",
    "SampleSet",
    "EnsembleModel",
    "ScoreVector",
    "LabelVector",
    "validate_params",
    "check_fingerprint",
    "minmax_scale_views",
]


class SconeError(Exception):
    """Base error. ``code`` is a stable, machine-readable identifier."""

    exit_code = 3

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class UsageError(SconeError):
    """Invalid parameters or arguments (CLI exit status 1)."""

    exit_code = 1


class DataError(SconeError):
    """Invalid, corrupt, or mismatched data (CLI exit status 2)."""

    exit_code = 2


class Label(IntEnum):
    """Ground-truth instance label; integer values match the labels file format."""

    NORMAL = 0
    ATTRIBUTE = 1
    CLASS = 2
    CLASS_ATTRIBUTE = 3


ANOMALY_LABELS = (Label.ATTRIBUTE, Label.CLASS, Label.CLASS_ATTRIBUTE)


class Variant(str, Enum):
    """Neighborhood membership rule used by the detector.

    SPHERICAL      adaptive-radius sphere plus k-nearest-sample membership
    VORONOI        nearest-sample cell only, no radius constraint
    SPHERICAL_1NN  SPHERICAL with the neighbor count forced to 1
    """

    SPHERICAL = "SPHERICAL"
    VORONOI = "VORONOI"
    SPHERICAL_1NN = "SPHERICAL_1NN"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiViewDataset:
    """N instances observed in V real-valued views.

    ``views[v]`` has shape (N, d_v).  Construction copies every view to
    float64, rejects empty or ragged inputs and non-finite values, and
    marks the arrays read-only.
    """

    views: tuple[np.ndarray, ...]

    def __post_init__(self):
        views = tuple(np.array(v, dtype=np.float64, order="C") for v in self.views)
        if len(views) == 0:
            raise DataError("EMPTY_DATASET", "a dataset needs at least one view")
        for v, arr in enumerate(views):
            if arr.ndim != 2:
                raise DataError(
                    "BAD_VIEW_SHAPE", f"view {v} must be 2-D, got shape {arr.shape}"
                )
            if arr.shape[1] < 1:
                raise DataError("BAD_VIEW_SHAPE", f"view {v} has no feature columns")
        n = views[0].shape[0]
        if n < 1:
            raise DataError("EMPTY_DATASET", "a dataset needs at least one instance")
        for v, arr in enumerate(views):
            if arr.shape[0] != n:
                raise DataError(
                    "ROW_COUNT_MISMATCH",
                    f"view 0 has {n} rows but view {v} has {arr.shape[0]}",
                )
            if not np.isfinite(arr).all():
                r, c = np.argwhere(~np.isfinite(arr))[0]
                raise DataError(
                    "NON_FINITE_VALUE",
                    f"view {v} has a non-finite value at row {r}, column {c}",
                )
        object.__setattr__(self, "views", tuple(_frozen(a) for a in views))

    @property
    def n_instances(self) -> int:
        return self.views[0].shape[0]

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> tuple[int, ...]:
        return tuple(v.shape[1] for v in self.views)

    def fingerprint(self) -> str:
        """Dimensions plus a 64-bit content checksum.

        Stored in fitted models and re-checked before scoring, so a model
        cannot silently be applied to data it was not fitted on.
        """
        h = hashlib.blake2b(digest_size=8)
        for v in self.views:
            h.update(v.tobytes())
        dims = ",".join(str(d) for d in self.view_dims)
        return f"{self.n_instances}n{self.n_views}v{dims}-{h.hexdigest()}"

    def __eq__(self, other):
        if not isinstance(other, MultiViewDataset):
            return NotImplemented
        return len(self.views) == len(other.views) and all(
            np.array_equal(a, b) for a, b in zip(self.views, other.views)
        )


@dataclass(frozen=True)
class SconeParams:
    """Detector parameters.

    psi      subsample size (points per ensemble member)
    k        neighbor count used by the membership test
    t        ensemble size
    seed     base RNG seed; member j is a pure function of (seed, j)
    variant  membership rule, see :class:`Variant`
    """

    psi: int
    k: int
    t: int = 200
    seed: int = 0
    variant: Variant = Variant.SPHERICAL

    def __post_init__(self):
        object.__setattr__(self, "psi", int(self.psi))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def effective_k(self) -> int:
        """Neighbor count actually applied; the 1-NN variant pins it to 1."""
        return 1 if self.variant is Variant.SPHERICAL_1NN else self.k


def validate_params(params: SconeParams, dataset: MultiViewDataset) -> None:
    """Check parameters against dataset dimensions.

    Raises :class:`UsageError` with a specific code on the first violated
    constraint; returns None when everything holds.
    """
    n = dataset.n_instances
    if n < 1:
        raise UsageError("EMPTY_DATASET", "cannot fit on an empty dataset")
    if params.psi < 2:
        raise UsageError(
            "PSI_TOO_SMALL",
            f"adaptive radii need at least one other sample (psi >= 2), got {params.psi}",
        )
    if params.psi > n:
        raise UsageError(
            "PSI_EXCEEDS_N",
            f"cannot draw {params.psi} distinct samples from {n} instances",
        )
    if params.k < 1:
        raise UsageError("K_TOO_SMALL", f"k must be >= 1, got {params.k}")
    if params.k > params.psi:
        raise UsageError(
            "K_EXCEEDS_PSI",
            f"k nearest samples among {params.psi} requires k <= psi, got k={params.k}",
        )
    if params.t < 1:
        raise UsageError("T_TOO_SMALL", f"ensemble size must be >= 1, got {params.t}")
    if not 0 <= params.seed < 2**64:
        raise UsageError(
            "SEED_OUT_OF_RANGE", f"seed must be a 64-bit unsigned int, got {params.seed}"
        )


@dataclass(frozen=True, eq=False)
class SampleSet:
    """One ensemble member: psi sampled instance indices plus a (V, psi)
    matrix of adaptive radii, radii[v][i] being sample i's radius in view v."""

    indices: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64)
        radii = np.array(self.radii, dtype=np.float64)
        if idx.ndim != 1 or idx.size == 0:
            raise SconeError("BAD_SAMPLE_SET", "indices must be a non-empty 1-D array")
        if np.unique(idx).size != idx.size:
            raise SconeError("BAD_SAMPLE_SET", "sample indices must be distinct")
        if (idx < 0).any():
            raise SconeError("BAD_SAMPLE_SET", "sample indices must be nonnegative")
        if radii.ndim != 2 or radii.shape[1] != idx.size:
            raise SconeError(
                "BAD_SAMPLE_SET",
                f"radii must have shape (n_views, {idx.size}), got {radii.shape}",
            )
        if not np.isfinite(radii).all() or (radii < 0).any():
            raise SconeError("BAD_SAMPLE_SET", "radii must be finite and nonnegative")
        object.__setattr__(self, "indices", _frozen(idx))
        object.__setattr__(self, "radii", _frozen(radii))

    @property
    def psi(self) -> int:
        return self.indices.size

    @property
    def n_views(self) -> int:
        return self.radii.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(
            self.radii, other.radii
        )


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """A fitted ensemble: parameters, t member sample sets, and the
    fingerprint of the dataset the radii were computed from."""

    params: SconeParams
    members: tuple[SampleSet, ...]
    dataset_fingerprint: str

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) != self.params.t:
            raise SconeError(
                "BAD_MODEL",
                f"expected {self.params.t} members, got {len(members)}",
            )
        for m in members:
            if m.psi != self.params.psi:
                raise SconeError(
                    "BAD_MODEL",
                    f"member has {m.psi} samples, parameters say {self.params.psi}",
                )
            if m.n_views != members[0].n_views:
                raise SconeError("BAD_MODEL", "members disagree on the view count")
        if not self.dataset_fingerprint:
            raise SconeError("BAD_MODEL", "missing dataset fingerprint")
        object.__setattr__(self, "members", members)

    @property
    def n_views(self) -> int:
        return self.members[0].n_views

    def __eq__(self, other):
        if not isinstance(other, EnsembleModel):
            return NotImplemented
        return (
            self.params == other.params
            and self.dataset_fingerprint == other.dataset_fingerprint
            and len(self.members) == len(other.members)
            and all(a == b for a, b in zip(self.members, other.members))
        )


def check_fingerprint(model: EnsembleModel, dataset: MultiViewDataset) -> None:
    """Reject scoring a dataset the model was not fitted on."""
    fp = dataset.fingerprint()
    if fp != model.dataset_fingerprint:
        raise DataError(
            "FINGERPRINT_MISMATCH",
            f"model was fitted on {model.dataset_fingerprint}, got {fp}",
        )


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Per-instance consistency scores in [0, 1], in dataset order.

    Every value is a mean of psi*t binary membership indicators, so it is
    an exact multiple of 1/(psi*t)."""

    consistency: np.ndarray

    def __post_init__(self):
        c = np.array(self.consistency, dtype=np.float64)
        if c.ndim != 1:
            raise SconeError("BAD_SCORES", "consistency must be 1-D")
        if c.size and ((c < 0).any() or (c > 1).any() or not np.isfinite(c).all()):
            raise SconeError("BAD_SCORES", "consistency values must lie in [0, 1]")
        object.__setattr__(self, "consistency", _frozen(c))

    def __len__(self) -> int:
        return self.consistency.size

    def __eq__(self, other):
        if not isinstance(other, ScoreVector):
            return NotImplemented
        return np.array_equal(self.consistency, other.consistency)


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Per-instance ground-truth labels (see :class:`Label`)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int64)
        if vals.ndim != 1:
            raise DataError("BAD_LABELS", "labels must be 1-D")
        valid = {int(label) for label in Label}
        if vals.size and not np.isin(vals, list(valid)).all():
            bad = vals[~np.isin(vals, list(valid))][0]
            raise DataError("BAD_LABELS", f"unknown label value {bad}")
        object.__setattr__(self, "values", _frozen(vals))

    def __len__(self) -> int:
        return self.values.size

    @property
    def normal_mask(self) -> np.ndarray:
        return self.values == Label.NORMAL

    @property
    def anomaly_mask(self) -> np.ndarray:
        return self.values != Label.NORMAL

    def counts(self) -> dict[Label, int]:
        return {label: int((self.values == label).sum()) for label in Label}

    def __eq__(self, other):
        if not isinstance(other, LabelVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)


def minmax_scale_views(dataset: MultiViewDataset) -> MultiViewDataset:
    """Rescale every feature column to [0, 1]; constant columns map to 0.

    Optional preprocessing for real data whose views mix scales.  Off by
    default everywhere: distances are otherwise computed on raw features.
    """
    scaled = []
    for view in dataset.views:
        lo = view.min(axis=0)
        span = view.max(axis=0) - lo
        span = np.where(span == 0.0, 1.0, span)
        scaled.append((view - lo) / span)
    return MultiViewDataset(tuple(scaled))
