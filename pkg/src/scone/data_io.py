"""File formats: manifests, per-view feature tables, labels, scores, models.

A manifest is a small ``key: value`` text file naming one feature file per
view (in view order) plus an optional labels file::

    name: my-dataset
    view: view0.csv
    view: view1.csv
    labels: labels.txt

Feature files are comma-separated numeric text, one instance per row, with
an optional single header row (auto-detected when the first line does not
parse as numbers).  Labels are one integer per line: 0 normal,
1 attribute, 2 class, 3 class-attribute.  Relative paths resolve against
the manifest's directory.

All numeric output uses round-trip decimal rendering, so every save/load
pair reproduces values exactly, and loaders either return a fully valid
object or raise a specific error with location information.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

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
)

__all__ = [
    "LoadedDataset",
    "LoadedScores",
    "load_manifest",
    "load_view_table",
    "load_labels",
    "save_dataset",
    "save_scores",
    "load_scores",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "scone-model"
MODEL_VERSION = 1


def _fmt(x: float) -> str:
    # shortest decimal that round-trips to the same float64
    return repr(float(x))


def _require(path: Path) -> Path:
    if not path.exists():
        raise DataError("MISSING_FILE", str(path))
    return path


@dataclass(frozen=True)
class LoadedDataset:
    dataset: MultiViewDataset
    labels: LabelVector | None
    name: str | None


@dataclass(frozen=True)
class LoadedScores:
    consistency: np.ndarray
    anomaly: np.ndarray
    labels: LabelVector | None


def _parse_row(line: str):
    return [float(tok) for tok in line.split(",")]


def load_view_table(path) -> np.ndarray:
    """One view's feature matrix from comma-separated numeric text."""
    path = _require(Path(path))
    rows = []
    width = None
    saw_header = False
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = _parse_row(line)
            except ValueError:
                if not rows and not saw_header:
                    saw_header = True  # single header row is allowed
                    continue
                raise DataError(
                    "PARSE_ERROR", f"{path} line {lineno}: not a numeric row"
                ) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    "PARSE_ERROR",
                    f"{path} line {lineno}: expected {width} columns, got {len(row)}",
                )
            for col, value in enumerate(row):
                if not np.isfinite(value):
                    raise DataError(
                        "NON_FINITE_VALUE",
                        f"{path} line {lineno}: non-finite value at row "
                        f"{len(rows)}, column {col}",
                    )
            rows.append(row)
    if not rows:
        raise DataError("PARSE_ERROR", f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def load_labels(path, n_expected: int | None = None) -> LabelVector:
    """Labels file: one integer per line."""
    path = _require(Path(path))
    values = []
    valid = {int(label) for label in Label}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                value = int(line)
            except ValueError:
                raise DataError(
                    "PARSE_ERROR", f"{path} line {lineno}: not an integer label"
                ) from None
            if value not in valid:
                raise DataError(
                    "PARSE_ERROR",
                    f"{path} line {lineno}: label must be one of {sorted(valid)}",
                )
            values.append(value)
    if n_expected is not None and len(values) != n_expected:
        raise DataError(
            "ROW_COUNT_MISMATCH",
            f"{path}: {len(values)} labels for {n_expected} instances",
        )
    return LabelVector(np.array(values, dtype=np.int64))


def load_manifest(path) -> LoadedDataset:
    """Load a dataset (and labels, when listed) from a manifest file."""
    path = _require(Path(path))
    view_files = []
    labels_file = None
    name = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition(":")
            key, value = key.strip().lower(), value.strip()
            if not sep or not value:
                raise DataError(
                    "PARSE_ERROR", f"{path} line {lineno}: expected 'key: value'"
                )
            if key == "view":
                view_files.append(value)
            elif key == "labels":
                if labels_file is not None:
                    raise DataError(
                        "PARSE_ERROR", f"{path} line {lineno}: duplicate labels entry"
                    )
                labels_file = value
            elif key == "name":
                name = value
            else:
                raise DataError(
                    "PARSE_ERROR", f"{path} line {lineno}: unknown key {key!r}"
                )
    if not view_files:
        raise DataError("PARSE_ERROR", f"{path}: manifest lists no views")
    base = path.parent
    arrays = [load_view_table(base / f) for f in view_files]
    n = arrays[0].shape[0]
    for f, arr in zip(view_files, arrays):
        if arr.shape[0] != n:
            raise DataError(
                "ROW_COUNT_MISMATCH",
                f"{view_files[0]} has {n} rows but {f} has {arr.shape[0]}",
            )
    dataset = MultiViewDataset(tuple(arrays))
    labels = None
    if labels_file is not None:
        labels = load_labels(base / labels_file, dataset.n_instances)
    return LoadedDataset(dataset, labels, name)


def save_dataset(directory, dataset: MultiViewDataset, labels=None, name=None) -> Path:
    """Write view tables, optional labels, and a manifest into a directory.

    Returns the manifest path.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        lines = []
        if name:
            lines.append(f"name: {name}")
        for v, view in enumerate(dataset.views):
            fname = f"view{v}.csv"
            with open(directory / fname, "w", encoding="utf-8") as handle:
                for row in view:
                    handle.write(",".join(_fmt(x) for x in row) + "\n")
            lines.append(f"view: {fname}")
        if labels is not None:
            with open(directory / "labels.txt", "w", encoding="utf-8") as handle:
                for value in labels.values:
                    handle.write(f"{int(value)}\n")
            lines.append("labels: labels.txt")
        manifest = directory / "manifest.txt"
        manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError("IO_ERROR", str(exc)) from exc
    return manifest


def save_scores(path, scores: ScoreVector, labels: LabelVector | None = None) -> None:
    """Score table: index, consistency, anomaly score, and label if given."""
    header = "index,consistency,anomaly_score"
    if labels is not None:
        if len(labels) != len(scores):
            raise DataError("ROW_COUNT_MISMATCH", "labels do not match the scores")
        header += ",label"
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(header + "\n")
            for i, c in enumerate(scores.consistency):
                row = f"{i},{_fmt(c)},{_fmt(1.0 - c)}"
                if labels is not None:
                    row += f",{int(labels.values[i])}"
                handle.write(row + "\n")
    except OSError as exc:
        raise DataError("IO_ERROR", str(exc)) from exc


def load_scores(path) -> LoadedScores:
    """Read back a score table written by :func:`save_scores`."""
    path = _require(Path(path))
    with open(path, encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or not lines[0].startswith("index,consistency,anomaly_score"):
        raise DataError("PARSE_ERROR", f"{path}: missing score header")
    has_labels = lines[0].split(",") == ["index", "consistency", "anomaly_score", "label"]
    consistency, anomaly, labels = [], [], []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split(",")
        if len(parts) != (4 if has_labels else 3):
            raise DataError("PARSE_ERROR", f"{path} line {lineno}: wrong column count")
        try:
            index = int(parts[0])
            consistency.append(float(parts[1]))
            anomaly.append(float(parts[2]))
            if has_labels:
                labels.append(int(parts[3]))
        except ValueError:
            raise DataError(
                "PARSE_ERROR", f"{path} line {lineno}: not a numeric row"
            ) from None
        if index != lineno - 2:
            raise DataError(
                "PARSE_ERROR", f"{path} line {lineno}: indices must be 0,1,2,..."
            )
    return LoadedScores(
        np.array(consistency, dtype=np.float64),
        np.array(anomaly, dtype=np.float64),
        LabelVector(np.array(labels, dtype=np.int64)) if has_labels else None,
    )


def save_model(path, model: EnsembleModel) -> None:
    """Serialize a fitted model to JSON (exact float round-trip)."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "params": {
            "psi": model.params.psi,
            "k": model.params.k,
            "t": model.params.t,
            "seed": model.params.seed,
            "variant": model.params.variant.value,
        },
        "dataset_fingerprint": model.dataset_fingerprint,
        "members": [
            {"indices": m.indices.tolist(), "radii": m.radii.tolist()}
            for m in model.members
        ],
    }
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
            handle.write("\n")
    except OSError as exc:
        raise DataError("IO_ERROR", str(exc)) from exc


def load_model(path) -> EnsembleModel:
    """Load a model saved by :func:`save_model`, re-validating its structure."""
    path = _require(Path(path))
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise DataError("IO_ERROR", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise DataError("CORRUPT_MODEL", f"{path}: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataError("CORRUPT_MODEL", f"{path}: not a model file")
    if payload.get("version") != MODEL_VERSION:
        raise DataError(
            "VERSION_MISMATCH",
            f"{path}: model version {payload.get('version')!r}, expected {MODEL_VERSION}",
        )
    fingerprint = payload.get("dataset_fingerprint")
    if not fingerprint:
        raise DataError("CORRUPT_MODEL", f"{path}: missing dataset fingerprint")
    try:
        params = SconeParams(**payload["params"])
        members = tuple(
            SampleSet(
                np.array(m["indices"], dtype=np.int64),
                np.array(m["radii"], dtype=np.float64),
            )
            for m in payload["members"]
        )
        return EnsembleModel(params, members, fingerprint)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError("CORRUPT_MODEL", f"{path}: {exc}") from None
    except SconeError as exc:
        raise DataError("CORRUPT_MODEL", f"{path}: {exc}") from None
