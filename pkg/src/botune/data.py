"""Flow-record ingestion, preprocessing, and the synthetic anomaly benchmark.

The pipeline order is: load (or synthesize) -> stratified split -> fit
categorical codes and min-max ranges on the training split only -> apply
to both splits. Categorical cells are carried as raw strings until
``encode_categoricals`` replaces them with integer codes; the feature
matrix holds NaN placeholders in those columns until then.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, SchemaError

KIND_NUMERIC = "numeric"
KIND_CATEGORICAL = "categorical"
KIND_TIMESTAMP = "timestamp"
KIND_LABEL = "label"
_KINDS = (KIND_NUMERIC, KIND_CATEGORICAL, KIND_TIMESTAMP, KIND_LABEL)

DURATION_COLUMN = "duration"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    drop: bool = False


@dataclass(frozen=True)
class Schema:
    """Declared layout of a CSV flow file plus the positive-label value."""

    columns: tuple[Column, ...]
    label_positive: str

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError("schema column names must be unique")
        for c in self.columns:
            if c.kind not in _KINDS:
                raise ConfigError(f"unknown column kind {c.kind!r} for {c.name!r}")
        labels = [c for c in self.columns if c.kind == KIND_LABEL]
        if len(labels) != 1:
            raise ConfigError(f"schema must declare exactly one label column, got {len(labels)}")
        n_ts = sum(1 for c in self.columns if c.kind == KIND_TIMESTAMP and not c.drop)
        if n_ts not in (0, 2):
            raise ConfigError(
                "timestamp columns must come as a (start, end) pair; "
                f"schema declares {n_ts}"
            )

    @property
    def label_column(self) -> str:
        return next(c.name for c in self.columns if c.kind == KIND_LABEL)


def parse_schema_text(text: str) -> Schema:
    """Parse the plain-text schema format: one ``name,kind[,drop]`` per line.

    A ``label_positive=<value>`` line names the raw label value mapped to
    class 1. Blank lines and ``#`` comments are ignored.
    """
    columns: list[Column] = []
    label_positive = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and line.split("=", 1)[0].strip() == "label_positive":
            label_positive = line.split("=", 1)[1].strip()
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3) or not parts[0]:
            raise ConfigError(f"schema line {lineno}: expected 'name,kind[,drop]', got {raw!r}")
        drop = False
        if len(parts) == 3:
            if parts[2] != "drop":
                raise ConfigError(f"schema line {lineno}: third field must be 'drop'")
            drop = True
        columns.append(Column(parts[0], parts[1], drop))
    if label_positive is None:
        raise ConfigError("schema is missing a 'label_positive=<value>' line")
    return Schema(tuple(columns), label_positive)


def read_schema(path: str | Path) -> Schema:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"schema file not found: {p}")
    return parse_schema_text(p.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels (0 = normal, 1 = attack).

    ``raw_categories`` holds the raw string values of still-unencoded
    categorical columns; the matching matrix columns are NaN until
    ``encode_categoricals`` fills them.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    raw_categories: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if self.features.shape[0] < 1:
            raise DataError("dataset must contain at least one row")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError("labels length must match feature rows")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must contain only 0/1")
        if len(self.feature_names) != self.features.shape[1]:
            raise DataError("feature_names length must match feature columns")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        raw = None
        if self.raw_categories is not None:
            raw = {k: v[idx] for k, v in self.raw_categories.items()}
        return replace(self, features=self.features[idx], labels=self.labels[idx], raw_categories=raw)


def _parse_time(cell: str) -> float:
    """Timestamps are epoch seconds or ISO-8601; returns seconds as float."""
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(cell).timestamp()
    except ValueError:
        raise ValueError(f"cannot parse {cell!r} as a timestamp")


def load_csv(path: str | Path, schema: Schema) -> Dataset:
    """Read an RFC-4180 CSV against ``schema`` into a :class:`Dataset`.

    A non-dropped timestamp pair (start, end) is replaced by a single
    ``duration`` column (end - start, seconds) at the start column's
    position. Dropped columns never appear in the output. The label
    column maps ``schema.label_positive`` to 1 and everything else to 0.
    """
    p = Path(path)
    if not p.exists():
        raise DataError(f"CSV file not found: {p}")
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{p}: file is empty")
        header = [h.strip() for h in header]
        declared = {c.name for c in schema.columns}
        for c in schema.columns:
            if c.name not in header:
                raise SchemaError(f"{p}: CSV is missing schema column {c.name!r}")
        for name in header:
            if name not in declared:
                raise SchemaError(f"{p}: CSV column {name!r} is not declared in the schema")
        col_pos = {name: i for i, name in enumerate(header)}

        kept = [c for c in schema.columns if not c.drop and c.kind != KIND_LABEL]
        ts_cols = [c for c in kept if c.kind == KIND_TIMESTAMP]
        label_name = schema.label_column

        rows: list[list] = []
        labels: list[int] = []
        for row_idx, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(f"{p}: row {row_idx}: expected {len(header)} cells, got {len(row)}")
            parsed = []
            for c in kept:
                cell = row[col_pos[c.name]].strip()
                if c.kind == KIND_NUMERIC:
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"{p}: row {row_idx}: column {c.name!r}: "
                            f"cannot parse {cell!r} as a number"
                        )
                elif c.kind == KIND_TIMESTAMP:
                    try:
                        parsed.append(_parse_time(cell))
                    except ValueError as exc:
                        raise DataError(f"{p}: row {row_idx}: column {c.name!r}: {exc}")
                else:
                    parsed.append(cell)
            rows.append(parsed)
            labels.append(1 if row[col_pos[label_name]].strip() == schema.label_positive else 0)

    if not rows:
        raise DataError(f"{p}: file has a header but no data rows")

    # Collapse the timestamp pair into a derived duration column in place
    # of the start column.
    out_names: list[str] = []
    out_kinds: list[str] = []
    out_cols: list[np.ndarray] = []
    raw_categories: dict[str, np.ndarray] = {}
    n = len(rows)
    ts_values: dict[str, np.ndarray] = {}
    for j, c in enumerate(kept):
        col = [r[j] for r in rows]
        if c.kind == KIND_TIMESTAMP:
            ts_values[c.name] = np.asarray(col, dtype=np.float64)
    for j, c in enumerate(kept):
        if c.kind == KIND_TIMESTAMP:
            if c.name == ts_cols[0].name:
                dur = ts_values[ts_cols[1].name] - ts_values[ts_cols[0].name]
                out_names.append(DURATION_COLUMN)
                out_kinds.append(KIND_NUMERIC)
                out_cols.append(dur)
            continue
        col = [r[j] for r in rows]
        if c.kind == KIND_CATEGORICAL:
            raw_categories[c.name] = np.asarray(col, dtype=object)
            out_cols.append(np.full(n, np.nan))
        else:
            out_cols.append(np.asarray(col, dtype=np.float64))
        out_names.append(c.name)
        out_kinds.append(c.kind)

    features = np.column_stack(out_cols) if out_cols else np.empty((n, 0))
    return Dataset(
        features=features,
        labels=np.asarray(labels, dtype=np.int64),
        feature_names=tuple(out_names),
        feature_kinds=tuple(out_kinds),
        raw_categories=raw_categories or None,
    )


@dataclass(frozen=True)
class ScalingParams:
    """Per-column (min, max) learned on the training split only."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if np.any(self.mins > self.maxs):
            raise DataError("scaling params require min <= max per column")


def fit_minmax(train: Dataset) -> ScalingParams:
    """Column extrema of the training features. Encode categoricals first."""
    if not np.isfinite(train.features).all():
        raise DataError("cannot fit scaling on non-finite features; encode categoricals first")
    return ScalingParams(mins=train.features.min(axis=0), maxs=train.features.max(axis=0))


def apply_minmax(data: Dataset, params: ScalingParams) -> Dataset:
    """Map each column through (x - min) / (max - min), clipped to [0, 1].

    A constant training column (min == max) carries no information and
    maps to 0. Test values outside the training extrema are clipped.
    """
    span = params.maxs - params.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (data.features - params.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    scaled = np.clip(scaled, 0.0, 1.0)
    return replace(data, features=scaled)


@dataclass(frozen=True)
class CategoricalMap:
    """Dense integer codes per categorical column, fitted on training data.

    An unseen level at transform time maps to the reserved code
    ``len(levels)`` rather than raising: novel values are routine in
    intrusion traffic.
    """

    levels: dict[str, tuple[str, ...]]

    def code(self, column: str, value: str) -> int:
        levs = self.levels[column]
        try:
            return levs.index(value)
        except ValueError:
            return len(levs)

    def decode(self, column: str, code: int) -> str:
        return self.levels[column][code]


def fit_categories(train: Dataset) -> CategoricalMap:
    """Collect sorted distinct levels per raw categorical column."""
    raw = train.raw_categories or {}
    return CategoricalMap(levels={name: tuple(sorted(set(vals.tolist()))) for name, vals in raw.items()})


def encode_categoricals(data: Dataset, cmap: CategoricalMap) -> Dataset:
    """Replace raw categorical columns with their integer codes."""
    if data.raw_categories is None:
        return data
    features = data.features.copy()
    for name, values in data.raw_categories.items():
        if name not in cmap.levels:
            raise DataError(f"categorical map has no entry for column {name!r}")
        j = data.feature_names.index(name)
        lookup = {lev: i for i, lev in enumerate(cmap.levels[name])}
        unseen = len(cmap.levels[name])
        features[:, j] = [lookup.get(v, unseen) for v in values.tolist()]
    return replace(data, features=features, raw_categories=None)


def stratified_split(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic per-class split; proportions within 1 row of exact."""
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for cls in (0, 1):
        members = np.flatnonzero(data.labels == cls)
        if members.size == 0:
            continue
        if members.size < 2:
            raise DataError(f"class {cls} has fewer than 2 rows; cannot split")
        perm = rng.permutation(members)
        n_test = int(round(members.size * test_fraction))
        test_idx.append(perm[:n_test])
        train_idx.append(perm[n_test:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return data.subset(train), data.subset(test)


def benchmark_feature_names(n_features: int) -> tuple[str, ...]:
    return tuple(f"f{i:02d}" for i in range(1, n_features + 1))


def synthesize_benchmark(
    n_rows: int,
    n_features: int,
    anomaly_fraction: float,
    difficulty: float,
    seed: int,
) -> Dataset:
    """Generate a two-class benchmark with tunable class overlap.

    Both classes draw from the same mixture of three Gaussian clusters;
    the anomaly class is then translated along a random direction so that
    the realized margin between the classes equals
    ``std * (0.5 - 3 * difficulty)``. At difficulty 0 the sampled classes
    are strictly linearly separable; larger values push the anomalies
    deeper into the normal cloud. Pure function of its arguments.
    """
    if n_features < 2:
        raise DataError("synthesize_benchmark requires n_features >= 2")
    if not 0 < anomaly_fraction < 0.5:
        raise DataError("anomaly_fraction must lie in (0, 0.5)")
    if difficulty < 0:
        raise DataError("difficulty must be non-negative")
    rng = np.random.default_rng(seed)
    n_anom = int(round(n_rows * anomaly_fraction))
    n_norm = n_rows - n_anom

    centers = rng.uniform(-2.0, 2.0, size=(3, n_features))
    assign = rng.integers(0, 3, size=n_rows)
    X = centers[assign] + rng.normal(0.0, 0.6, size=(n_rows, n_features))

    direction = rng.normal(size=n_features)
    direction /= np.linalg.norm(direction)
    proj = X @ direction
    proj_norm, proj_anom = proj[:n_norm], proj[n_norm:]
    spread = float(proj_norm.std()) or 1.0
    margin = spread * (0.5 - 3.0 * difficulty)
    shift = (proj_norm.max() - proj_anom.min()) + margin
    X[n_norm:] += shift * direction

    labels = np.zeros(n_rows, dtype=np.int64)
    labels[n_norm:] = 1
    order = rng.permutation(n_rows)
    return Dataset(
        features=X[order],
        labels=labels[order],
        feature_names=benchmark_feature_names(n_features),
        feature_kinds=(KIND_NUMERIC,) * n_features,
    )


def write_csv(data: Dataset, path: str | Path, label_positive: str = "attack", label_negative: str = "normal") -> None:
    """Write a dataset back out as CSV with text labels (for `synth`)."""
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(list(data.feature_names) + ["label"]) + "\n")
        for i in range(data.n_rows):
            cells = [repr(float(v)) for v in data.features[i]]
            cells.append(label_positive if data.labels[i] == 1 else label_negative)
            fh.write(",".join(cells) + "\n")


def write_benchmark_schema(n_features: int, path: str | Path, label_positive: str = "attack") -> None:
    """Write the schema file matching :func:`write_csv` output."""
    lines = [f"{name},numeric" for name in benchmark_feature_names(n_features)]
    lines.append("label,label")
    lines.append(f"label_positive={label_positive}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
