"""Fitting and linear-time scoring of the subsample ensemble.

Fitting draws t subsample sets; member j is a pure function of
(seed, j), so refitting with the same seed reproduces the model exactly.
Scoring tests every instance against every member's samples with batched
array arithmetic, chunked over instances so memory stays bounded and the
chunks can run on a thread pool.  Each instance's result is an exact
integer count of multi-view membership events divided once at the end,
so scores are bit-identical for any worker count.  Total work is
O(psi * t * V * N): linear in the dataset size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import (
    EnsembleModel,
    MultiViewDataset,
    SampleSet,
    SconeParams,
    ScoreVector,
    UsageError,
    Variant,
    check_fingerprint,
    validate_params,
)
from .neighborhoods import compute_radii

__all__ = [
    "fit",
    "score_dataset",
    "anomaly_scores",
    "co_membership_similarity",
    "consistency_indicators",
    "resolve_threads",
]

_INSTANCE_CHUNK = 2048
# Cap on elements of the (chunk, members, psi, d) difference tensor.
_ELEMENT_BUDGET = 1 << 22


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else SCONE_THREADS, else CPU count."""
    if threads is None:
        env = os.environ.get("SCONE_THREADS", "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise UsageError("BAD_THREAD_COUNT", f"thread count must be >= 1, got {threads}")
    return threads


def fit(dataset: MultiViewDataset, params: SconeParams) -> EnsembleModel:
    """Draw t subsample sets and precompute their per-view radii.

    Member j's indices depend only on (params.seed, j): psi distinct
    instance indices drawn without replacement.
    """
    validate_params(params, dataset)
    members = []
    for j in range(params.t):
        rng = np.random.default_rng((params.seed, j))
        idx = np.asarray(
            rng.choice(dataset.n_instances, size=params.psi, replace=False),
            dtype=np.int64,
        )
        radii = np.stack([compute_radii(view[idx]) for view in dataset.views])
        members.append(SampleSet(idx, radii))
    return EnsembleModel(params, tuple(members), dataset.fingerprint())


def _member_arrays(model, dataset):
    """Stack member samples and radii per view: (t, psi, d_v) and (t, psi)."""
    samples = []
    radii = []
    for v, view in enumerate(dataset.views):
        samples.append(np.stack([view[m.indices] for m in model.members]))
        radii.append(np.stack([m.radii[v] for m in model.members]))
    return samples, radii


def _membership_block(view_blocks, samples, radii, k, use_radius):
    """Multi-view membership indicators for a block of instances.

    view_blocks[v] is (c, d_v); returns a (c, t, psi) boolean array whose
    [x, j, i] entry says instance x is inside sample i's neighborhood of
    member j in every view.
    """
    c = view_blocks[0].shape[0]
    t, psi = radii[0].shape
    out = None
    for block, pts, rad in zip(view_blocks, samples, radii):
        d = block.shape[1]
        group = max(1, _ELEMENT_BUDGET // max(1, c * psi * d))
        member_hits = np.empty((c, t, psi), dtype=bool)
        for lo in range(0, t, group):
            hi = min(t, lo + group)
            diff = block[:, None, None, :] - pts[None, lo:hi]
            dist = np.sqrt(np.square(diff).sum(axis=-1))
            order = np.argsort(dist, axis=-1, kind="stable")
            mask = np.zeros(dist.shape, dtype=bool)
            np.put_along_axis(mask, order[..., :k], True, axis=-1)
            if use_radius:
                mask &= dist <= rad[None, lo:hi]
            member_hits[:, lo:hi] = mask
        out = member_hits if out is None else out & member_hits
    return out


def _membership_rule(params):
    if params.variant is Variant.VORONOI:
        return 1, False
    return params.effective_k, True


def _run_chunks(n, threads, work):
    spans = [(lo, min(lo + _INSTANCE_CHUNK, n)) for lo in range(0, n, _INSTANCE_CHUNK)]
    if threads == 1 or len(spans) == 1:
        for span in spans:
            work(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # list() re-raises the first worker exception
            list(pool.map(work, spans))


def score_dataset(
    model: EnsembleModel, dataset: MultiViewDataset, threads: int | None = None
) -> ScoreVector:
    """Consistency score of every instance: the fraction of the psi*t
    (member, sample) pairs whose neighborhood contains the instance in all
    views.  Raises FINGERPRINT_MISMATCH for a dataset the model was not
    fitted on."""
    check_fingerprint(model, dataset)
    threads = resolve_threads(threads)
    params = model.params
    k, use_radius = _membership_rule(params)
    samples, radii = _member_arrays(model, dataset)
    counts = np.empty(dataset.n_instances, dtype=np.int64)

    def work(span):
        lo, hi = span
        blocks = [view[lo:hi] for view in dataset.views]
        hits = _membership_block(blocks, samples, radii, k, use_radius)
        counts[lo:hi] = hits.sum(axis=(1, 2))

    _run_chunks(dataset.n_instances, threads, work)
    return ScoreVector(counts / (params.psi * params.t))


def anomaly_scores(scores: ScoreVector) -> np.ndarray:
    """Orientation flip for ranking: 1 - consistency, higher = more anomalous."""
    return 1.0 - scores.consistency


def consistency_indicators(
    model: EnsembleModel,
    dataset: MultiViewDataset,
    instance_indices=None,
    threads: int | None = None,
) -> np.ndarray:
    """Raw (n, t, psi) boolean membership indicators.

    Materializes every indicator, so keep it to desk-scale datasets; the
    scorer itself only accumulates counts.
    """
    check_fingerprint(model, dataset)
    threads = resolve_threads(threads)
    params = model.params
    k, use_radius = _membership_rule(params)
    samples, radii = _member_arrays(model, dataset)
    if instance_indices is None:
        gathered = dataset.views
        n = dataset.n_instances
    else:
        instance_indices = np.asarray(instance_indices, dtype=np.int64)
        gathered = [view[instance_indices] for view in dataset.views]
        n = instance_indices.size
    out = np.empty((n, params.t, params.psi), dtype=bool)

    def work(span):
        lo, hi = span
        blocks = [view[lo:hi] for view in gathered]
        out[lo:hi] = _membership_block(blocks, samples, radii, k, use_radius)

    _run_chunks(n, threads, work)
    return out


def co_membership_similarity(
    model: EnsembleModel, dataset: MultiViewDataset, a: int, b: int
) -> float:
    """Average number of consistent neighborhoods two instances share:
    (1/t) * sum over members and samples of both instances' indicators."""
    n = dataset.n_instances
    for idx in (a, b):
        if not 0 <= idx < n:
            raise UsageError("INDEX_OUT_OF_RANGE", f"instance {idx} not in [0, {n})")
    hits = consistency_indicators(model, dataset, np.array([a, b]), threads=1)
    return float((hits[0] & hits[1]).sum() / model.params.t)
