"""Command-line interface.

Subcommands: generate (synthetic benchmark data), fit-score (fit the
ensemble and write scores), evaluate (AUC from a score file), ablate
(compare membership rules), benchmark (runtime scaling), proportion
(consistent-neighbor retention), theorems (statistical property checks).

Every subcommand is deterministic given its flags and seeds; ``--threads``
changes wall-clock only, never any emitted value.  Exit codes: 0 ok,
1 usage error, 2 data error, 3 internal or failed property check.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import data_io, evaluation, oracle, synthetic
from .core import (
    DataError,
    Label,
    SconeError,
    SconeParams,
    UsageError,
    Variant,
    minmax_scale_views,
)
from .ensemble import anomaly_scores, fit, score_dataset

GRID_PSI = tuple(2**i for i in range(1, 9))
GRID_K = (1, 3, 5, 7, 11, 21, 51, 101)

_TYPE_COLUMNS = (
    ("attribute", Label.ATTRIBUTE),
    ("class", Label.CLASS),
    ("class_attribute", Label.CLASS_ATTRIBUTE),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("USAGE", message)


def _add_params(parser, with_variant=True):
    parser.add_argument("--psi", type=int, default=8, help="subsample size (default 8)")
    parser.add_argument("--k", type=int, default=3, help="neighbor count (default 3)")
    parser.add_argument("--t", type=int, default=200, help="ensemble size (default 200)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    if with_variant:
        parser.add_argument(
            "--variant",
            choices=[v.value for v in Variant],
            default=Variant.SPHERICAL.value,
            help="membership rule (default SPHERICAL)",
        )


def _add_threads(parser):
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: SCONE_THREADS or CPU count)",
    )


def _add_format(parser):
    parser.add_argument(
        "--format",
        choices=["table", "rows"],
        default="table",
        help="'rows' prints machine-readable CSV",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic multi-view benchmark dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=["varied", "uniform"], default="varied")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", default=None, help="comma list; writes one seed-<s>/ subdir each")
    p.add_argument("--n-normal", type=int, default=970)
    p.add_argument("--n-attribute", type=int, default=10)
    p.add_argument("--n-class", type=int, default=10)
    p.add_argument("--n-class-attribute", type=int, default=10)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("fit-score", help="fit the ensemble and write per-instance scores")
    p.add_argument("--data", required=True, help="dataset manifest")
    p.add_argument("--scores", required=True, help="output score file")
    p.add_argument("--model", default=None, help="also write the fitted model (JSON)")
    _add_params(p)
    _add_threads(p)
    p.add_argument(
        "--minmax-scale", action="store_true", help="rescale each feature to [0, 1] first"
    )
    p.add_argument(
        "--grid",
        action="store_true",
        help="search psi in powers of two and k in the standard list; needs labels",
    )
    _add_format(p)
    p.set_defaults(func=_cmd_fit_score)

    p = sub.add_parser("evaluate", help="overall and per-kind AUC from a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", default=None, help="labels file (if not embedded)")
    p.add_argument("--roc", default=None, help="write (fpr,tpr) points here")
    _add_format(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ablate", help="compare all membership rules on one dataset")
    p.add_argument("--data", required=True)
    _add_params(p, with_variant=False)
    _add_threads(p)
    _add_format(p)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("benchmark", help="runtime scaling over dataset sizes")
    p.add_argument("--sizes", required=True, help="comma list, ascending")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--mode", choices=["varied", "uniform"], default="varied")
    _add_params(p, with_variant=False)
    _add_threads(p)
    _add_format(p)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("proportion", help="consistent-neighbor retention of the ensemble")
    p.add_argument("--data", required=True)
    p.add_argument("--k-oracle", type=int, default=200)
    p.add_argument("--normals", type=int, default=20, help="random normal instances to probe")
    _add_params(p)
    _add_threads(p)
    _add_format(p)
    p.set_defaults(func=_cmd_proportion)

    p = sub.add_parser("theorems", help="statistical property checks of the neighborhoods")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--psi", type=int, default=8)
    p.add_argument("--draws", type=int, default=50, help="sample draws for the count check")
    p.add_argument("--trials", type=int, default=5000, help="Monte Carlo trials")
    p.add_argument("--density-ratio", type=float, default=10.0)
    _add_format(p)
    p.set_defaults(func=_cmd_theorems)

    return parser


def _print_table(header, rows, machine):
    if machine:
        print(",".join(header))
        for row in rows:
            print(",".join(str(x) for x in row))
        return
    cells = [[str(x) for x in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def _parse_int_list(text, flag):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError("USAGE", f"{flag} expects a comma-separated integer list") from None
    if not values:
        raise UsageError("USAGE", f"{flag} lists no values")
    return values


def _cmd_generate(args):
    seeds = _parse_int_list(args.seeds, "--seeds") if args.seeds else None
    counts = dict(
        n_normal=args.n_normal,
        n_attribute=args.n_attribute,
        n_class=args.n_class,
        n_class_attribute=args.n_class_attribute,
    )

    def write(seed, directory):
        dataset, labels = synthetic.make_benchmark_dataset(args.mode, seed, **counts)
        manifest = data_io.save_dataset(
            directory, dataset, labels, name=f"synthetic-{args.mode}-seed{seed}"
        )
        print(manifest)

    if seeds is None:
        write(args.seed, args.out)
    else:
        from pathlib import Path

        for seed in seeds:
            write(seed, Path(args.out) / f"seed-{seed}")
    return 0


def _load_for_fit(args):
    loaded = data_io.load_manifest(args.data)
    dataset = loaded.dataset
    if getattr(args, "minmax_scale", False):
        dataset = minmax_scale_views(dataset)
    return dataset, loaded.labels


def _grid_search(dataset, labels, args):
    if labels is None:
        raise UsageError(
            "GRID_REQUIRES_LABELS",
            "grid search selects by labeled AUC; supply a labels file in the manifest",
        )
    flags = labels.values != Label.NORMAL
    best = None
    rows = []
    for psi in GRID_PSI:
        if psi > dataset.n_instances:
            continue
        for k in GRID_K:
            if k > psi:
                continue
            params = SconeParams(psi, k, args.t, args.seed, args.variant)
            model = fit(dataset, params)
            scores = score_dataset(model, dataset, threads=args.threads)
            value = evaluation.auc(anomaly_scores(scores), flags)
            rows.append((psi, k, f"{value:.4f}"))
            if best is None or value > best[0]:
                best = (value, params, model, scores)
    if args.format == "rows":
        _print_table(("psi", "k", "auc"), rows, machine=True)
    value, params, model, scores = best
    print(f"grid best: psi={params.psi} k={params.k} auc={value:.4f}")
    return params, model, scores


def _cmd_fit_score(args):
    dataset, labels = _load_for_fit(args)
    if args.grid:
        params, model, scores = _grid_search(dataset, labels, args)
    else:
        params = SconeParams(args.psi, args.k, args.t, args.seed, args.variant)
        model = fit(dataset, params)
        scores = score_dataset(model, dataset, threads=args.threads)
    data_io.save_scores(args.scores, scores, labels)
    if args.model:
        data_io.save_model(args.model, model)
    print(
        f"scored {dataset.n_instances} instances "
        f"(psi={params.psi} k={params.k} t={params.t} variant={params.variant.value}) "
        f"-> {args.scores}"
    )
    return 0


def _scores_and_labels(args):
    loaded = data_io.load_scores(args.scores)
    labels = loaded.labels
    if args.labels is not None:
        labels = data_io.load_labels(args.labels, loaded.anomaly.size)
    if labels is None:
        raise DataError(
            "MISSING_LABELS", "no label column in the score file and no --labels given"
        )
    return loaded, labels


def _cmd_evaluate(args):
    loaded, labels = _scores_and_labels(args)
    flags = labels.values != Label.NORMAL
    overall = evaluation.auc(loaded.anomaly, flags)
    per_kind = evaluation.per_type_auc(loaded.anomaly, labels)
    row = [f"{overall:.4f}"] + [
        f"{per_kind[kind]:.4f}" if kind in per_kind else "n/a"
        for _, kind in _TYPE_COLUMNS
    ]
    header = ("auc",) + tuple(name for name, _ in _TYPE_COLUMNS)
    _print_table(header, [row], machine=args.format == "rows")
    if args.roc:
        pts = evaluation.roc_points(loaded.anomaly, flags)
        with open(args.roc, "w", encoding="utf-8") as handle:
            handle.write("fpr,tpr\n")
            for fpr, tpr in pts:
                handle.write(f"{repr(float(fpr))},{repr(float(tpr))}\n")
        print(f"wrote {pts.shape[0]} ROC points -> {args.roc}")
    return 0


def _cmd_ablate(args):
    loaded = data_io.load_manifest(args.data)
    if loaded.labels is None:
        raise DataError("MISSING_LABELS", "ablation needs labels in the manifest")
    dataset, labels = loaded.dataset, loaded.labels
    flags = labels.values != Label.NORMAL
    rows = []
    for variant in (Variant.SPHERICAL, Variant.SPHERICAL_1NN, Variant.VORONOI):
        params = SconeParams(args.psi, args.k, args.t, args.seed, variant)
        model = fit(dataset, params)
        scores = anomaly_scores(score_dataset(model, dataset, threads=args.threads))
        per_kind = evaluation.per_type_auc(scores, labels)
        row = [variant.value, f"{evaluation.auc(scores, flags):.4f}"]
        row += [
            f"{per_kind[kind]:.4f}" if kind in per_kind else "n/a"
            for _, kind in _TYPE_COLUMNS
        ]
        rows.append(row)
    header = ("variant", "auc") + tuple(name for name, _ in _TYPE_COLUMNS)
    _print_table(header, rows, machine=args.format == "rows")
    return 0


def _cmd_benchmark(args):
    sizes = _parse_int_list(args.sizes, "--sizes")
    params = SconeParams(args.psi, args.k, args.t, args.seed)
    result = evaluation.runtime_benchmark(
        sizes, params, args.mode, repetitions=args.reps, threads=args.threads
    )
    rows = [(n, f"{seconds:.4f}") for n, seconds in result.rows]
    _print_table(("n", "median_seconds"), rows, machine=args.format == "rows")
    if result.slope is None:
        print("slope,n/a" if args.format == "rows" else "log-log slope: n/a")
    elif args.format == "rows":
        print(f"slope,{result.slope:.4f}")
    else:
        print(f"log-log slope: {result.slope:.4f}")
    return 0


def _cmd_proportion(args):
    loaded = data_io.load_manifest(args.data)
    if loaded.labels is None:
        raise DataError("MISSING_LABELS", "the retention metric needs labels")
    dataset, labels = loaded.dataset, loaded.labels
    params = SconeParams(args.psi, args.k, args.t, args.seed, args.variant)
    model = fit(dataset, params)
    pool = np.flatnonzero(labels.normal_mask)
    if pool.size < args.normals:
        raise DataError(
            "COUNT_EXCEEDS_N", f"asked for {args.normals} normals, dataset has {pool.size}"
        )
    rng = np.random.default_rng((args.seed, 1))
    chosen = np.sort(rng.choice(pool, size=args.normals, replace=False))
    value = oracle.proportion_consistent(dataset, model, args.k_oracle, chosen)
    if args.format == "rows":
        print("proportion_percent")
        print(repr(value))
    else:
        print(f"consistent-neighbor retention: {value:.1f}%")
    return 0


def _cmd_theorems(args):
    machine = args.format == "rows"
    failures = 0

    dataset, labels = synthetic.make_benchmark_dataset("varied", args.seed)
    means = oracle.cross_view_count_experiment(
        dataset, labels, psi=args.psi, n_draws=args.draws, seed=args.seed
    )
    rel_diff = abs(means[0] - means[1]) / np.mean(means)
    count_ok = rel_diff <= 0.15
    failures += not count_ok

    sparse = synthetic.uniform_box_generator((0.0, 0.0), 5.0)
    dense = synthetic.uniform_box_generator((0.0, 0.0), 5.0 / math.sqrt(args.density_ratio))
    p_sparse, p_dense = oracle.estimate_membership_probability(
        sparse, dense, (0.0, 0.0), (0.5, 0.0), psi=args.psi, k=1,
        trials=args.trials, seed=args.seed,
    )
    pvalue = oracle.one_sided_rate_pvalue(
        round(p_sparse * args.trials), round(p_dense * args.trials)
    )
    density_ok = p_sparse > p_dense and pvalue < 0.01
    failures += not density_ok

    if machine:
        print("check,statistic,value,verdict")
        print(f"cross_view_counts,rel_diff,{rel_diff:.4f},{'PASS' if count_ok else 'FAIL'}")
        print(f"density_adaptivity,p_value,{pvalue:.3e},{'PASS' if density_ok else 'FAIL'}")
    else:
        print(
            f"cross-view counts: view means {means[0]:.2f} / {means[1]:.2f}, "
            f"relative difference {rel_diff * 100:.1f}% (limit 15%) -> "
            + ("PASS" if count_ok else "FAIL")
        )
        print(
            f"density adaptivity: p_sparse={p_sparse:.3f} > p_dense={p_dense:.3f}, "
            f"one-sided p={pvalue:.3e} (limit 0.01) -> "
            + ("PASS" if density_ok else "FAIL")
        )
    return 3 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SconeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: IO_ERROR: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
