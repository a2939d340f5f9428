"""Metrics and the runtime scaling harness.

AUC uses midranks, so heavily quantized scores (consistency values are
multiples of 1/(psi*t)) are handled exactly: ties between an anomaly and a
normal count half.  The benchmark harness times fit+score over growing
dataset sizes and fits a log-log slope; the scaling claim is about the
slope, never about absolute seconds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from .core import DataError, Label, LabelVector, SconeParams, UsageError
from .ensemble import fit, score_dataset
from .synthetic import ClusterConfig, default_cluster_config, make_clustered_dataset

__all__ = [
    "auc",
    "per_type_auc",
    "roc_points",
    "BenchmarkResult",
    "runtime_benchmark",
]


def _check_scores(anomaly_scores, flags):
    s = np.asarray(anomaly_scores, dtype=np.float64)
    y = np.asarray(flags, dtype=bool)
    if s.ndim != 1 or s.shape != y.shape:
        raise UsageError("BAD_INPUT", "scores and flags must be 1-D and aligned")
    if not np.isfinite(s).all():
        raise DataError("NON_FINITE_VALUE", "scores contain a non-finite value")
    return s, y


def auc(anomaly_scores, is_anomaly) -> float:
    """Probability a random anomaly outscores a random normal, ties count half.

    Computed exactly from midranks:
    (sum of anomaly ranks - n_pos*(n_pos+1)/2) / (n_pos * n_neg),
    which equals P(score_a > score_n) + 0.5 * P(score_a = score_n).
    """
    s, y = _check_scores(anomaly_scores, is_anomaly)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DataError("SINGLE_CLASS", "AUC needs at least one anomaly and one normal")
    ranks = rankdata(s)
    rank_sum = float(ranks[y].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def per_type_auc(anomaly_scores, labels: LabelVector) -> dict[Label, float]:
    """AUC per anomaly kind, each computed against the normal instances only.

    Kinds with no instances are absent from the result; with no normal
    instances at all the map is empty.
    """
    s = np.asarray(anomaly_scores, dtype=np.float64)
    values = labels.values
    if s.shape != values.shape:
        raise UsageError("BAD_INPUT", "scores and labels must be aligned")
    normal = values == Label.NORMAL
    out: dict[Label, float] = {}
    if not normal.any():
        return out
    for kind in (Label.ATTRIBUTE, Label.CLASS, Label.CLASS_ATTRIBUTE):
        positives = values == kind
        if not positives.any():
            continue
        mask = normal | positives
        out[kind] = auc(s[mask], positives[mask])
    return out


def roc_points(anomaly_scores, is_anomaly) -> np.ndarray:
    """(FPR, TPR) pairs of the ROC step curve, one point per distinct
    threshold, starting at (0, 0)."""
    s, y = _check_scores(anomaly_scores, is_anomaly)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DataError("SINGLE_CLASS", "ROC needs at least one anomaly and one normal")
    order = np.argsort(-s, kind="stable")
    sorted_scores = s[order]
    hits = y[order]
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    last_of_group = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    pts = np.column_stack([fp[last_of_group] / n_neg, tp[last_of_group] / n_pos])
    return np.vstack([[0.0, 0.0], pts])


@dataclass(frozen=True)
class BenchmarkResult:
    """Measured (n, median seconds) rows plus the fitted log-log slope.

    ``slope`` is None when fewer than two sizes were measured.
    """

    rows: tuple[tuple[int, float], ...]
    slope: float | None


def runtime_benchmark(
    sizes,
    params: SconeParams,
    generator_config: ClusterConfig | str = "varied",
    repetitions: int = 3,
    threads: int | None = None,
) -> BenchmarkResult:
    """Time fit+score on generated data of each size.

    Sizes must be ascending.  Each size is measured ``repetitions`` times
    (3 or more recommended) and the median wall-clock kept; the slope of
    log(median) against log(n) is fitted when at least two sizes are
    given.  A slope near 1 confirms linear scaling in the dataset size.
    """
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise UsageError("BAD_INPUT", "need at least one size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise UsageError("BAD_INPUT", "sizes must be strictly ascending")
    if repetitions < 1:
        raise UsageError("BAD_INPUT", "repetitions must be >= 1")
    rows = []
    for n in sizes:
        if isinstance(generator_config, str):
            cfg = default_cluster_config(generator_config, n)
        else:
            cfg = replace(generator_config, n_normal=n, assignment=None)
        dataset, _ = make_clustered_dataset(cfg, seed=(params.seed, n))
        times = []
        for _ in range(repetitions):
            start = time.perf_counter()
            model = fit(dataset, params)
            score_dataset(model, dataset, threads=threads)
            times.append(time.perf_counter() - start)
        rows.append((n, float(np.median(times))))
    slope = None
    if len(rows) >= 2:
        log_n = np.log([r[0] for r in rows])
        log_t = np.log([r[1] for r in rows])
        slope = float(np.polyfit(log_n, log_t, 1)[0])
    return BenchmarkResult(tuple(rows), slope)
