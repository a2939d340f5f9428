"""Reference implementations and statistical probes.

``naive_score`` transcribes the ensemble score as a plain triple loop over
members, samples, and instances with no batching or precomputation; it
exists so the vectorized scorer can be checked against an independently
written path.  ``consistent_neighbors`` computes the full-dataset notion
of cross-view neighbors that the subsample ensemble approximates, and
feeds the neighbor-retention proportion metric.  The two Monte Carlo
probes measure the data-dependent properties the adaptive radii are
designed to have: per-view neighborhood populations that agree across
views, and membership probabilities that grow as the data around a point
gets sparser.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import binomtest

from .core import (
    DataError,
    EnsembleModel,
    Label,
    LabelVector,
    MultiViewDataset,
    SconeParams,
    ScoreVector,
    UsageError,
    check_fingerprint,
    validate_params,
)
from .ensemble import consistency_indicators
from .neighborhoods import compute_radii, consistent_membership

__all__ = [
    "consistent_neighbors",
    "naive_score",
    "proportion_consistent",
    "estimate_membership_probability",
    "one_sided_rate_pvalue",
    "cross_view_neighborhood_counts",
    "cross_view_count_experiment",
]


def consistent_neighbors(dataset: MultiViewDataset, x_index: int, k: int) -> np.ndarray:
    """Instances that are k-nearest neighbors of ``x`` in every view.

    kNN is taken over the full dataset per view (ties by ascending index)
    and the per-view sets are intersected.  ``x`` itself is included
    whenever it is its own nearest neighbor in every view, which holds
    unless a duplicate with a lower index shadows it.

    Returns the member indices sorted ascending.
    """
    n = dataset.n_instances
    if k < 1:
        raise UsageError("K_TOO_SMALL", f"k must be >= 1, got {k}")
    if k > n:
        raise UsageError("K_EXCEEDS_N", f"k={k} exceeds the {n} instances")
    common = None
    for view in dataset.views:
        dist = np.sqrt(np.square(view - view[x_index]).sum(axis=-1))
        order = np.argsort(dist, kind="stable")
        knn = set(order[:k].tolist())
        common = knn if common is None else common & knn
    return np.array(sorted(common), dtype=np.int64)


def naive_score(
    dataset: MultiViewDataset, members, params: SconeParams
) -> ScoreVector:
    """Quadratic reference scorer: triple loop over members, instances and
    samples, calling the scalar membership functions one pair at a time.

    Output contract is identical to :func:`scone.ensemble.score_dataset`
    given the same members; this implementation deliberately shares no
    batching code with it.
    """
    validate_params(params, dataset)
    members = list(members)
    if len(members) != params.t:
        raise UsageError(
            "MEMBER_COUNT_MISMATCH",
            f"got {len(members)} members but params.t={params.t}",
        )
    n = dataset.n_instances
    counts = np.zeros(n, dtype=np.int64)
    for member in members:
        for x in range(n):
            for pos in range(params.psi):
                counts[x] += consistent_membership(dataset, x, member, pos, params)
    return ScoreVector(counts / (params.psi * params.t))


def _retention_from_similarity(dataset, similarity_rows, k_oracle, normal_indices, k_repr):
    """Shared core of the proportion metric: fraction of each instance's
    consistent neighbors that also rank in its top-k_repr by similarity."""
    n = dataset.n_instances
    positions = np.arange(n)
    retained = []
    for x in normal_indices:
        neighbors = consistent_neighbors(dataset, x, k_oracle)
        neighbors = neighbors[neighbors != x]
        if neighbors.size == 0:
            warnings.warn(
                f"EMPTY_CONSISTENT_SET: instance {x} has no consistent neighbors; skipped"
            )
            continue
        sims = np.array(similarity_rows(x), dtype=np.float64)
        sims[x] = -np.inf
        # primary key: similarity descending; ties resolved by ascending index
        order = np.lexsort((positions, -sims))
        top = order[:k_repr]
        retained.append(np.intersect1d(neighbors, top).size / neighbors.size * 100.0)
    if not retained:
        raise DataError(
            "EMPTY_CONSISTENT_SET",
            "every selected instance had an empty consistent-neighbor set",
        )
    return float(np.mean(retained))


def proportion_consistent(
    dataset: MultiViewDataset,
    model: EnsembleModel,
    k_oracle: int,
    normal_indices,
    k_repr: int | None = None,
) -> float:
    """Percentage of full-dataset consistent neighbors that the ensemble's
    co-membership similarity keeps among the top-k_repr most similar.

    For each selected (normal) instance x: compute its consistent
    neighbors at k_oracle, rank all other instances by co-membership
    similarity to x, and measure the overlap.  Instances with an empty
    consistent set are skipped with a warning.  ``k_repr`` defaults to
    ``k_oracle``.  Returns the mean percentage over the selection.
    """
    check_fingerprint(model, dataset)
    n = dataset.n_instances
    normal_indices = np.asarray(normal_indices, dtype=np.int64)
    if normal_indices.size == 0:
        raise UsageError("NO_INSTANCES_SELECTED", "need at least one instance")
    if (normal_indices < 0).any() or (normal_indices >= n).any():
        raise UsageError("INDEX_OUT_OF_RANGE", "selected instance out of range")
    if k_repr is None:
        k_repr = k_oracle
    if not 1 <= k_repr <= n:
        raise UsageError("K_EXCEEDS_N", f"k_repr={k_repr} not in [1, {n}]")

    hits = consistency_indicators(model, dataset)
    flat = hits.reshape(n, -1).astype(np.float64)
    t = model.params.t

    def similarity_rows(x):
        return flat @ flat[x] / t

    return _retention_from_similarity(dataset, similarity_rows, k_oracle, normal_indices, k_repr)


def _membership_rate(generator, probe, shared, psi, k, trials, seed):
    rng = np.random.default_rng(seed)
    draws = np.asarray(generator(rng, trials * (psi - 1)), dtype=np.float64)
    if draws.shape != (trials * (psi - 1), probe.size):
        raise UsageError(
            "BAD_GENERATOR",
            f"generator returned shape {draws.shape}, expected "
            f"({trials * (psi - 1)}, {probe.size})",
        )
    if np.all(draws == draws[0]):
        raise UsageError("DEGENERATE_GENERATOR", "generator puts all mass at one point")
    draws = draws.reshape(trials, psi - 1, probe.size)
    to_shared = np.sqrt(np.square(draws - shared).sum(axis=-1))
    radius = to_shared.min(axis=-1)
    to_probe = np.sqrt(np.square(draws - probe).sum(axis=-1))
    gap = np.sqrt(np.square(probe - shared).sum())
    # shared sample sits at position 0 of each trial's sample set, so draws
    # at exactly equal distance rank after it
    closer = (to_probe < gap).sum(axis=-1)
    inside = (gap <= radius) & (closer <= k - 1)
    return float(inside.mean())


def estimate_membership_probability(
    generator_a,
    generator_b,
    probe_point,
    shared_sample,
    psi: int,
    k: int,
    trials: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo probability that a shared sample's neighborhood captures
    a probe point, under two different data distributions.

    For each trial, psi-1 points are drawn from the generator and the
    shared sample is forced into the sample set; the single-view
    membership indicator of the probe w.r.t. the shared sample is then
    evaluated.  Both generators consume identical per-position RNG
    streams, so swapping the generators exactly swaps the outputs.

    Generators are callables ``(rng, n) -> (n, d) array``.  Returns the
    two acceptance rates (fractions in [0, 1]).
    """
    probe = np.asarray(probe_point, dtype=np.float64).ravel()
    shared = np.asarray(shared_sample, dtype=np.float64).ravel()
    if probe.shape != shared.shape:
        raise UsageError("BAD_INPUT", "probe and shared sample must share a dimension")
    if psi < 2:
        raise UsageError("FEWER_THAN_TWO_SAMPLES", "psi must be >= 2")
    if not 1 <= k <= psi:
        raise UsageError("K_EXCEEDS_PSI", f"k={k} not in [1, {psi}]")
    if trials < 1:
        raise UsageError("TRIALS_TOO_FEW", "need at least one trial")
    rate_a = _membership_rate(generator_a, probe, shared, psi, k, trials, seed)
    rate_b = _membership_rate(generator_b, probe, shared, psi, k, trials, seed)
    return rate_a, rate_b


def one_sided_rate_pvalue(hits_high: int, hits_low: int) -> float:
    """P-value against 'the first acceptance rate is not higher'.

    Conditional binomial rate comparison: with equal rates and equal trial
    counts, the first count given the total is Binomial(total, 1/2).
    """
    total = hits_high + hits_low
    if total == 0:
        return 1.0
    return float(binomtest(int(hits_high), int(total), 0.5, alternative="greater").pvalue)


def cross_view_neighborhood_counts(
    dataset: MultiViewDataset, labels: LabelVector, sample_indices
) -> np.ndarray:
    """Mean number of normal instances inside the samples' spheres, per view.

    Radii follow the adaptive rule on the given sample set.  With views
    generated from the same latent structure the per-view means should
    agree, whatever the per-view densities are.
    """
    idx = np.asarray(sample_indices, dtype=np.int64)
    if idx.size < 2:
        raise UsageError("FEWER_THAN_TWO_SAMPLES", "need at least two sampled instances")
    if len(labels) != dataset.n_instances:
        raise DataError("ROW_COUNT_MISMATCH", "labels do not match the dataset")
    normal = labels.values == Label.NORMAL
    means = []
    for view in dataset.views:
        pts = view[idx]
        radii = compute_radii(pts)
        dist = np.sqrt(np.square(view[normal][:, None, :] - pts[None]).sum(axis=-1))
        means.append(float((dist <= radii).sum(axis=0).mean()))
    return np.array(means)


def cross_view_count_experiment(
    dataset: MultiViewDataset,
    labels: LabelVector,
    psi: int,
    n_draws: int,
    seed: int = 0,
) -> np.ndarray:
    """Average :func:`cross_view_neighborhood_counts` over repeated sample
    draws; draw j uses the RNG stream (seed, j)."""
    if n_draws < 1:
        raise UsageError("TRIALS_TOO_FEW", "need at least one draw")
    per_draw = []
    for j in range(n_draws):
        rng = np.random.default_rng((seed, j))
        idx = rng.choice(dataset.n_instances, size=psi, replace=False)
        per_draw.append(cross_view_neighborhood_counts(dataset, labels, idx))
    return np.mean(per_draw, axis=0)
