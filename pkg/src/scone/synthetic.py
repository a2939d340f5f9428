"""Synthetic multi-view data: cluster generators and anomaly injectors.

The cluster generator draws every instance's views from per-view Gaussian
clusters that share one latent assignment, so a normal instance sits in
corresponding clusters of every view.  Injectors then convert selected
rows into the three anomaly kinds:

* attribute: all views replaced by uniform draws over each feature's
  observed range (deviant everywhere);
* class: two instances from different latent clusters swap features in a
  nonempty proper subset of views (each view normal, views inconsistent);
* class-attribute: a pair swaps a view subset, then the complementary
  views are overwritten with uniform range draws.

Injectors only ever touch rows that are still labeled normal, leave every
other row bit-identical, and are deterministic in (arguments, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Label, LabelVector, MultiViewDataset, UsageError

__all__ = [
    "ClusterConfig",
    "default_cluster_config",
    "make_clustered_dataset",
    "inject_attribute_anomalies",
    "inject_class_anomalies",
    "inject_class_attribute_anomalies",
    "make_benchmark_dataset",
    "split_views",
    "uniform_box_generator",
]

# Default two-view geometry: three well-separated 2-D clusters per view.
# Varied mode permutes the spreads across views, so the same latent cluster
# is dense in one view and diffuse in the other; uniform mode spreads all
# clusters equally.
_CENTERS_VIEW1 = ((0.0, 0.0), (20.0, 0.0), (0.0, 20.0))
_CENTERS_VIEW2 = ((12.0, -12.0), (-15.0, -10.0), (5.0, 18.0))
_VARIED_STDS = ((0.3, 1.0, 2.5), (2.5, 0.3, 1.0))
_UNIFORM_STDS = ((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))


@dataclass(frozen=True)
class ClusterConfig:
    """Gaussian cluster layout shared by all views.

    ``centers[v]`` is a (C, d_v) array of cluster centers for view v and
    ``stds[v]`` the C per-cluster spreads in that view.  ``assignment``
    optionally pins each instance's latent cluster; when None the
    generator draws it uniformly.
    """

    n_normal: int
    centers: tuple
    stds: tuple
    assignment: np.ndarray | None = None

    def __post_init__(self):
        if self.n_normal < 1:
            raise UsageError("BAD_CONFIG", "n_normal must be >= 1")
        centers = tuple(np.atleast_2d(np.asarray(c, dtype=np.float64)) for c in self.centers)
        stds = tuple(np.asarray(s, dtype=np.float64).ravel() for s in self.stds)
        if len(centers) != len(stds) or len(centers) == 0:
            raise UsageError("BAD_CONFIG", "need matching centers and stds per view")
        n_clusters = centers[0].shape[0]
        for c, s in zip(centers, stds):
            if c.shape[0] != n_clusters or s.size != n_clusters:
                raise UsageError(
                    "BAD_CONFIG", "all views must define the same number of clusters"
                )
            if (s < 0).any():
                raise UsageError("BAD_CONFIG", "cluster stds must be nonnegative")
        assignment = self.assignment
        if assignment is not None:
            assignment = np.asarray(assignment, dtype=np.int64)
            if assignment.shape != (self.n_normal,):
                raise UsageError("BAD_CONFIG", "assignment length must equal n_normal")
            if (assignment < 0).any() or (assignment >= n_clusters).any():
                raise UsageError("BAD_CONFIG", "assignment references a missing cluster")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "assignment", assignment)

    @property
    def n_clusters(self) -> int:
        return self.centers[0].shape[0]

    @property
    def n_views(self) -> int:
        return len(self.centers)


def default_cluster_config(mode: str, n_normal: int) -> ClusterConfig:
    """Bundled two-view benchmark geometry in 'varied' or 'uniform' mode."""
    if mode == "varied":
        stds = _VARIED_STDS
    elif mode == "uniform":
        stds = _UNIFORM_STDS
    else:
        raise UsageError("BAD_CONFIG", f"unknown density mode {mode!r}")
    return ClusterConfig(n_normal, (_CENTERS_VIEW1, _CENTERS_VIEW2), stds)


def make_clustered_dataset(config: ClusterConfig, seed=0):
    """Draw ``config.n_normal`` instances from the per-view clusters.

    Returns (dataset, labels) with every label NORMAL.  Deterministic in
    (config, seed); ``seed`` may be an int or a numpy Generator.
    """
    rng = np.random.default_rng(seed)
    assignment = config.assignment
    if assignment is None:
        assignment = rng.integers(0, config.n_clusters, size=config.n_normal)
    views = []
    for centers, stds in zip(config.centers, config.stds):
        noise = rng.standard_normal((config.n_normal, centers.shape[1]))
        views.append(centers[assignment] + noise * stds[assignment][:, None])
    dataset = MultiViewDataset(tuple(views))
    labels = LabelVector(np.full(config.n_normal, Label.NORMAL, dtype=np.int64))
    return dataset, labels


def _writable_views(dataset):
    return [np.array(v) for v in dataset.views]


def _normal_pool(labels):
    return np.flatnonzero(labels.values == Label.NORMAL)


def _feature_ranges(view):
    return view.min(axis=0), view.max(axis=0)


def inject_attribute_anomalies(
    dataset: MultiViewDataset, labels: LabelVector, count: int, seed=0
):
    """Replace ``count`` normal rows with uniform draws over each feature's
    observed range, in every view.

    Returns (dataset, labels, changed_indices).
    """
    if count < 0:
        raise UsageError("BAD_CONFIG", "count must be >= 0")
    pool = _normal_pool(labels)
    if count > pool.size:
        raise UsageError(
            "COUNT_EXCEEDS_N", f"asked for {count} anomalies, only {pool.size} normal rows"
        )
    if count == 0:
        return dataset, labels, np.array([], dtype=np.int64)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(pool, size=count, replace=False))
    views = _writable_views(dataset)
    for view in views:
        lo, hi = _feature_ranges(view)
        view[chosen] = rng.uniform(lo, hi, size=(count, view.shape[1]))
    values = np.array(labels.values)
    values[chosen] = Label.ATTRIBUTE
    return MultiViewDataset(tuple(views)), LabelVector(values), chosen


def _draw_pairs(rng, pool, pair_count, assignment):
    """Disjoint pairs from the pool; partners must differ in latent cluster
    when an assignment is supplied (a same-cluster swap would be invisible)."""
    available = list(pool)
    pairs = []
    for _ in range(pair_count):
        first = available.pop(int(rng.integers(len(available))))
        if assignment is not None:
            candidates = [i for i in available if assignment[i] != assignment[first]]
        else:
            candidates = available
        if not candidates:
            raise UsageError(
                "BAD_CONFIG", "no cross-cluster partner available for a swap pair"
            )
        second = candidates[int(rng.integers(len(candidates)))]
        available.remove(second)
        pairs.append((first, second))
    return pairs


def _view_subset(rng, n_views):
    # uniform over nonempty proper subsets; at V=2 this is exactly one view
    mask = int(rng.integers(1, 2**n_views - 1))
    return [v for v in range(n_views) if mask >> v & 1]


def _check_pair_args(dataset, labels, pair_count):
    if pair_count < 0:
        raise UsageError("BAD_CONFIG", "pair_count must be >= 0")
    if dataset.n_views < 2:
        raise UsageError(
            "SINGLE_VIEW_DATASET", "swapping views needs at least two views"
        )
    pool = _normal_pool(labels)
    if 2 * pair_count > pool.size:
        raise UsageError(
            "PAIRS_EXCEED_N",
            f"{pair_count} pairs need {2 * pair_count} normal rows, only {pool.size}",
        )
    return pool


def inject_class_anomalies(
    dataset: MultiViewDataset,
    labels: LabelVector,
    pair_count: int,
    seed=0,
    assignment=None,
):
    """Swap a nonempty proper subset of views between ``pair_count`` pairs
    of normal rows; both members of each pair become class anomalies.

    Returns (dataset, labels, changed_indices).
    """
    pool = _check_pair_args(dataset, labels, pair_count)
    if pair_count == 0:
        return dataset, labels, np.array([], dtype=np.int64)
    rng = np.random.default_rng(seed)
    pairs = _draw_pairs(rng, pool, pair_count, assignment)
    views = _writable_views(dataset)
    for first, second in pairs:
        for v in _view_subset(rng, dataset.n_views):
            tmp = views[v][first].copy()
            views[v][first] = views[v][second]
            views[v][second] = tmp
    changed = np.sort(np.array([i for pair in pairs for i in pair], dtype=np.int64))
    values = np.array(labels.values)
    values[changed] = Label.CLASS
    return MultiViewDataset(tuple(views)), LabelVector(values), changed


def inject_class_attribute_anomalies(
    dataset: MultiViewDataset,
    labels: LabelVector,
    pair_count: int,
    seed=0,
    assignment=None,
):
    """Swap a view subset between pairs, then overwrite the complementary
    views with uniform range draws; the pair becomes class-attribute
    anomalies.  Returns (dataset, labels, changed_indices)."""
    pool = _check_pair_args(dataset, labels, pair_count)
    if pair_count == 0:
        return dataset, labels, np.array([], dtype=np.int64)
    rng = np.random.default_rng(seed)
    pairs = _draw_pairs(rng, pool, pair_count, assignment)
    views = _writable_views(dataset)
    ranges = [_feature_ranges(v) for v in views]
    for first, second in pairs:
        swapped = _view_subset(rng, dataset.n_views)
        for v in swapped:
            tmp = views[v][first].copy()
            views[v][first] = views[v][second]
            views[v][second] = tmp
        for v in range(dataset.n_views):
            if v in swapped:
                continue
            lo, hi = ranges[v]
            views[v][[first, second]] = rng.uniform(lo, hi, size=(2, views[v].shape[1]))
    changed = np.sort(np.array([i for pair in pairs for i in pair], dtype=np.int64))
    values = np.array(labels.values)
    values[changed] = Label.CLASS_ATTRIBUTE
    return MultiViewDataset(tuple(views)), LabelVector(values), changed


def make_benchmark_dataset(
    mode: str = "varied",
    seed=0,
    n_normal: int = 970,
    n_attribute: int = 10,
    n_class: int = 10,
    n_class_attribute: int = 10,
    config: ClusterConfig | None = None,
):
    """Standard synthetic benchmark: clustered two-view data plus the three
    anomaly kinds, injected into disjoint rows.

    With the defaults this produces 1000 instances labeled
    970/10/10/10.  ``n_class`` and ``n_class_attribute`` count instances
    and must be even (anomalies of those kinds come in swap pairs).
    Returns (dataset, labels).
    """
    for name, value in (("n_class", n_class), ("n_class_attribute", n_class_attribute)):
        if value % 2:
            raise UsageError("BAD_CONFIG", f"{name} must be even, got {value}")
    total = n_normal + n_attribute + n_class + n_class_attribute
    rng = np.random.default_rng(seed)
    if config is None:
        config = default_cluster_config(mode, total)
    else:
        config = replace(config, n_normal=total, assignment=None)
    assignment = rng.integers(0, config.n_clusters, size=total)
    config = replace(config, assignment=assignment)
    dataset, labels = make_clustered_dataset(config, rng)
    dataset, labels, _ = inject_attribute_anomalies(dataset, labels, n_attribute, rng)
    dataset, labels, _ = inject_class_anomalies(
        dataset, labels, n_class // 2, rng, assignment=assignment
    )
    dataset, labels, _ = inject_class_attribute_anomalies(
        dataset, labels, n_class_attribute // 2, rng, assignment=assignment
    )
    return dataset, labels


def split_views(matrix, view_count: int, seed=0) -> MultiViewDataset:
    """Partition a single feature matrix into ``view_count`` views.

    Features are permuted by ``seed`` and cut into contiguous runs of
    near-equal size (sizes differ by at most one); every original feature
    lands in exactly one view.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise UsageError("BAD_INPUT", "expected a 2-D feature matrix")
    if view_count < 1:
        raise UsageError("BAD_CONFIG", "view_count must be >= 1")
    d = matrix.shape[1]
    if d < view_count:
        raise UsageError(
            "TOO_FEW_FEATURES", f"cannot split {d} features into {view_count} views"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(d)
    base, extra = divmod(d, view_count)
    views = []
    start = 0
    for v in range(view_count):
        size = base + (1 if v < extra else 0)
        views.append(matrix[:, perm[start : start + size]])
        start += size
    return MultiViewDataset(tuple(views))


def uniform_box_generator(center, half_width: float):
    """Sampler drawing uniformly from an axis-aligned box around ``center``.

    Returns a callable ``(rng, n) -> (n, d) array``; shrinking the box
    raises the density for the same draw count.
    """
    center = np.asarray(center, dtype=np.float64).ravel()
    if half_width <= 0:
        raise UsageError("BAD_CONFIG", "half_width must be positive")

    def draw(rng, n):
        return rng.uniform(center - half_width, center + half_width, size=(n, center.size))

    return draw
