"""Dataset ingestion and preprocessing.

Pipeline: CSV + schema -> RawDataset -> imputation -> nominal-to-indicator
encoding -> per-feature rescaling into [1, 2] -> ProcessedDataset, plus a
seeded stratified holdout split. Statistics for imputation and rescaling are
always computed over the full dataset, before any splitting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, ParseError, SchemaError, StratificationError

COLUMN_KINDS = ("continuous", "nominal", "class")
MISSING_MARKERS = ("", "?")

DATASET_FORMAT = "punn-dataset"
DATASET_VERSION = 1


@dataclass
class ColumnSpec:
    name: str
    kind: str
    vocabulary: list[str] | None = None  # declared for nominal/class, else inferred


@dataclass
class RawDataset:
    columns: list[ColumnSpec]
    rows: list[list]  # cell = float | str | None (missing)

    @property
    def class_index(self) -> int:
        return next(i for i, c in enumerate(self.columns) if c.kind == "class")

    @property
    def class_labels(self) -> list[str]:
        return list(self.columns[self.class_index].vocabulary)


@dataclass
class NormalizationParams:
    """Per-feature ranges of the full dataset, kept so any rows can be mapped
    with the exact same affine transform later."""
    mins: np.ndarray
    maxs: np.ndarray

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        span = self.maxs - self.mins
        out = np.ones_like(matrix)
        varying = span > 0
        out[:, varying] = 1.0 + (matrix[:, varying] - self.mins[varying]) / span[varying]
        return out


@dataclass
class ProcessedDataset:
    patterns: np.ndarray        # (N, k) float64 in [1, 2]
    labels: np.ndarray          # (N,) int64 class indices
    feature_names: list[str]
    class_names: list[str]
    normalization: NormalizationParams | None = None
    _log_cache: np.ndarray | None = field(default=None, repr=False, compare=False)
    _gather_cache: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def pattern_count(self) -> int:
        return self.patterns.shape[0]

    @property
    def input_count(self) -> int:
        return self.patterns.shape[1]

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def log_patterns(self) -> np.ndarray:
        if self._log_cache is None:
            self._log_cache = np.log(self.patterns)
        return self._log_cache

    @property
    def trainable_gather(self) -> tuple[np.ndarray, np.ndarray]:
        """(row indices, column indices) of patterns whose class has a trainable
        output node, i.e. every class but the zero-output reference class."""
        if self._gather_cache is None:
            rows = np.flatnonzero(self.labels < self.class_count - 1)
            self._gather_cache = (rows, self.labels[rows])
        return self._gather_cache

    @property
    def one_hot(self) -> np.ndarray:
        targets = np.zeros((self.pattern_count, self.class_count))
        targets[np.arange(self.pattern_count), self.labels] = 1.0
        return targets


def load_schema(path) -> list[ColumnSpec]:
    """Schema file: one line per column, "name,kind" with an optional third
    field declaring the value vocabulary as pipe-separated entries."""
    columns = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (2, 3):
                raise ParseError(f"{path}:{lineno}: expected 'name,kind[,values]'")
            name, kind = parts[0], parts[1]
            if kind not in COLUMN_KINDS:
                raise SchemaError(f"{path}:{lineno}: unknown column kind {kind!r}")
            vocabulary = None
            if len(parts) == 3:
                if kind == "continuous":
                    raise SchemaError(f"{path}:{lineno}: continuous column cannot declare values")
                vocabulary = [v.strip() for v in parts[2].split("|") if v.strip()]
            columns.append(ColumnSpec(name, kind, vocabulary))
    if not columns:
        raise ParseError(f"{path}: schema file declares no columns")
    return columns


def load_table(path, schema: list[ColumnSpec]) -> RawDataset:
    """Parse a headered CSV file against a schema.

    Missing cells are marked "?" or left empty. Cell values in nominal and
    class columns must belong to the declared vocabulary when one is given;
    otherwise the vocabulary is inferred in order of first appearance.
    """
    class_columns = [c for c in schema if c.kind == "class"]
    if len(class_columns) != 1:
        raise SchemaError(f"schema must declare exactly one class column, found {len(class_columns)}")
    columns = [replace(c, vocabulary=list(c.vocabulary) if c.vocabulary else None) for c in schema]

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        if len(header) != len(columns):
            raise ParseError(
                f"{path}: header has {len(header)} columns, schema declares {len(columns)}"
            )
        for cell, col in zip(header, columns):
            if cell.strip() != col.name:
                raise ParseError(f"{path}: header column {cell.strip()!r} != schema {col.name!r}")

        declared = {id(c): c.vocabulary is not None for c in columns}
        rows = []
        for lineno, raw_row in enumerate(reader, start=2):
            if len(raw_row) != len(columns):
                raise ParseError(f"{path}:{lineno}: row has {len(raw_row)} cells, expected {len(columns)}")
            row = []
            for cell, col in zip(raw_row, columns):
                cell = cell.strip()
                if cell in MISSING_MARKERS:
                    if col.kind == "class":
                        raise DataError(f"{path}:{lineno}: class value is missing")
                    row.append(None)
                    continue
                if col.kind == "continuous":
                    try:
                        row.append(float(cell))
                    except ValueError:
                        raise ParseError(
                            f"{path}:{lineno}: {cell!r} is not numeric for column {col.name!r}"
                        ) from None
                else:
                    if declared[id(col)]:
                        if cell not in col.vocabulary:
                            raise SchemaError(
                                f"{path}:{lineno}: value {cell!r} not in vocabulary of {col.name!r}"
                            )
                    else:
                        if col.vocabulary is None:
                            col.vocabulary = []
                        if cell not in col.vocabulary:
                            col.vocabulary.append(cell)
                    row.append(cell)
            rows.append(row)

    dataset = RawDataset(columns, rows)
    class_col = columns[dataset.class_index]
    if class_col.vocabulary is None or len(class_col.vocabulary) < 2:
        raise DataError(f"{path}: fewer than two class labels present")
    return dataset


def impute_missing(raw: RawDataset) -> RawDataset:
    """Fill missing cells: continuous columns with the column mean, nominal
    columns with the column mode (ties resolved by vocabulary order).
    Statistics use every row of the dataset."""
    filled_columns = [replace(c, vocabulary=list(c.vocabulary) if c.vocabulary else None)
                      for c in raw.columns]
    new_rows = [list(r) for r in raw.rows]
    for idx, col in enumerate(filled_columns):
        cells = [r[idx] for r in new_rows]
        missing = [i for i, v in enumerate(cells) if v is None]
        if not missing:
            continue
        present = [v for v in cells if v is not None]
        if not present:
            raise DataError(f"column {col.name!r} has no values at all")
        if col.kind == "continuous":
            fill = sum(present) / len(present)
        else:
            counts = {v: 0 for v in col.vocabulary}
            for v in present:
                counts[v] += 1
            best = max(counts.values())
            fill = next(v for v in col.vocabulary if counts[v] == best)
        for i in missing:
            new_rows[i][idx] = fill
    return RawDataset(filled_columns, new_rows)


def encode_nominal(raw: RawDataset):
    """Numeric table from an imputed dataset.

    Continuous columns pass through; each nominal column with V vocabulary
    values becomes V 0/1 indicator columns (one per value); the class column
    becomes an integer label by vocabulary order.

    Returns (matrix, labels, feature_names, class_names).
    """
    n = len(raw.rows)
    feature_names: list[str] = []
    columns_out: list[np.ndarray] = []
    class_idx = raw.class_index
    class_vocab = raw.columns[class_idx].vocabulary
    labels = np.empty(n, dtype=np.int64)

    for idx, col in enumerate(raw.columns):
        cells = [r[idx] for r in raw.rows]
        if any(v is None for v in cells):
            raise ValueError(f"column {col.name!r} still has missing values; impute first")
        if col.kind == "class":
            index_of = {v: i for i, v in enumerate(class_vocab)}
            labels[:] = [index_of[v] for v in cells]
        elif col.kind == "continuous":
            feature_names.append(col.name)
            columns_out.append(np.asarray(cells, dtype=float))
        else:
            for value in col.vocabulary:
                feature_names.append(f"{col.name}={value}")
                columns_out.append(np.asarray([1.0 if v == value else 0.0 for v in cells]))

    matrix = np.column_stack(columns_out) if columns_out else np.empty((n, 0))
    return matrix, labels, feature_names, list(class_vocab)


def fit_apply_normalization(matrix: np.ndarray) -> tuple[np.ndarray, NormalizationParams]:
    """Rescale each feature affinely into [1, 2] using its min/max over the
    whole matrix; a constant feature maps to 1.0 everywhere."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix contains non-finite values")
    params = NormalizationParams(matrix.min(axis=0), matrix.max(axis=0))
    return params.apply(matrix), params


def preprocess(raw: RawDataset) -> ProcessedDataset:
    """Full pipeline from a loaded raw dataset: impute, encode, rescale."""
    imputed = impute_missing(raw)
    matrix, labels, feature_names, class_names = encode_nominal(imputed)
    patterns, params = fit_apply_normalization(matrix)
    return ProcessedDataset(patterns, labels, feature_names, class_names, params)


def preprocess_file(data_path, schema_path) -> ProcessedDataset:
    return preprocess(load_table(data_path, load_schema(schema_path)))


def _train_counts(class_sizes: list[int], ratio: float) -> list[int]:
    """Per-class train-set sizes.

    Each class contributes round(ratio * size) patterns (Python round,
    half to even). When ratio * total is integral the counts are nudged by a
    largest-remainder pass so the train total equals it exactly; every class
    stays within one pattern of exact proportionality either way.
    """
    exact = [ratio * s for s in class_sizes]
    counts = [min(int(round(e)), s) for e, s in zip(exact, class_sizes)]
    total_exact = ratio * sum(class_sizes)
    if abs(total_exact - round(total_exact)) < 1e-9:
        target = int(round(total_exact))
        adjusted: set[int] = set()
        while sum(counts) != target:
            over = sum(counts) > target
            candidates = [
                (counts[i] - exact[i] if over else exact[i] - counts[i],
                 class_sizes[i], -i, i)
                for i in range(len(counts))
                if i not in adjusted
                and (counts[i] > 0 if over else counts[i] < class_sizes[i])
            ]
            if not candidates:
                raise DataError("cannot reconcile per-class counts with the split ratio")
            _, _, _, pick = max(candidates)
            counts[pick] += -1 if over else 1
            adjusted.add(pick)
    return counts


def stratified_holdout(
    dataset: ProcessedDataset, ratio: float = 0.75, seed: int = 0
) -> tuple[ProcessedDataset, ProcessedDataset]:
    """Split into train/test keeping each class's share of the two sets as
    close to the full-set share as integer counts allow. Shuffling within each
    class is driven by the seed; rows keep their original relative order in
    the emitted sets."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    class_indices = [np.flatnonzero(dataset.labels == c) for c in range(dataset.class_count)]
    for c, idx in enumerate(class_indices):
        if len(idx) < 2:
            raise StratificationError(
                f"class {dataset.class_names[c]!r} has {len(idx)} pattern(s); need at least 2"
            )
    counts = _train_counts([len(idx) for idx in class_indices], ratio)

    train_rows: list[np.ndarray] = []
    test_rows: list[np.ndarray] = []
    for idx, take in zip(class_indices, counts):
        shuffled = rng.permutation(idx)
        train_rows.append(shuffled[:take])
        test_rows.append(shuffled[take:])
    train_idx = np.sort(np.concatenate(train_rows)).astype(np.int64)
    test_idx = np.sort(np.concatenate(test_rows)).astype(np.int64)

    def subset(indices: np.ndarray) -> ProcessedDataset:
        return ProcessedDataset(
            dataset.patterns[indices].copy(),
            dataset.labels[indices].copy(),
            list(dataset.feature_names),
            list(dataset.class_names),
            dataset.normalization,
        )

    return subset(train_idx), subset(test_idx)


def save_dataset(dataset: ProcessedDataset, path) -> None:
    """Versioned text format: header with dimensions, names and normalization
    ranges, then one comma-separated row per pattern (k values + label index).
    Floats are written with repr, so a reload is bit-exact."""
    for name in dataset.feature_names + dataset.class_names:
        if "," in name:
            raise ValueError(f"name {name!r} contains a comma")
    lines = [
        f"{DATASET_FORMAT} {DATASET_VERSION}",
        f"k {dataset.input_count}",
        f"L {dataset.class_count}",
        f"N {dataset.pattern_count}",
        "features " + ",".join(dataset.feature_names),
        "classes " + ",".join(dataset.class_names),
    ]
    if dataset.normalization is not None:
        ranges = " ".join(
            f"{repr(float(lo))}:{repr(float(hi))}"
            for lo, hi in zip(dataset.normalization.mins, dataset.normalization.maxs)
        )
        lines.append("normalization " + ranges)
    lines.append("data")
    for row, label in zip(dataset.patterns, dataset.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(label)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> ProcessedDataset:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith(DATASET_FORMAT):
        raise ParseError(f"{path}: not a recognized dataset file")
    version = lines[0].split()[1]
    if int(version) != DATASET_VERSION:
        raise ParseError(f"{path}: unsupported dataset version {version}")

    header: dict[str, str] = {}
    data_start = None
    for i, line in enumerate(lines[1:], start=1):
        if line == "data":
            data_start = i + 1
            break
        key, _, value = line.partition(" ")
        header[key] = value
    if data_start is None:
        raise ParseError(f"{path}: missing data section")

    k = int(header["k"])
    class_count = int(header["L"])
    n = int(header["N"])
    feature_names = header["features"].split(",") if header.get("features") else []
    class_names = header["classes"].split(",")
    if len(class_names) != class_count or len(feature_names) != k:
        raise ParseError(f"{path}: header counts disagree with name lists")

    normalization = None
    if "normalization" in header:
        mins, maxs = [], []
        for pair in header["normalization"].split():
            lo, _, hi = pair.partition(":")
            mins.append(float(lo))
            maxs.append(float(hi))
        normalization = NormalizationParams(np.asarray(mins), np.asarray(maxs))

    patterns = np.empty((n, k))
    labels = np.empty(n, dtype=np.int64)
    rows = [ln for ln in lines[data_start:] if ln]
    if len(rows) != n:
        raise ParseError(f"{path}: expected {n} data rows, found {len(rows)}")
    for r, line in enumerate(rows):
        cells = line.split(",")
        if len(cells) != k + 1:
            raise ParseError(f"{path}: data row {r} has {len(cells)} cells, expected {k + 1}")
        patterns[r] = [float(c) for c in cells[:k]]
        labels[r] = int(cells[k])
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= class_count:
        raise ParseError(f"{path}: label index out of range")
    return ProcessedDataset(patterns, labels, feature_names, class_names, normalization)
