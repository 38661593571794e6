"""Core data types and CSV ingestion for compound/predictor matrices.

A dataset couples an m x n matrix of raw predictor values with a binary
response per compound and a class tag per predictor.  Matrices are stored
read-only; subsetting helpers return new Dataset objects.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Raised when a dataset cannot be loaded or fails validation."""


class PredictorClass(enum.Enum):
    """Predictor family tag.  The file label for D3 is "3D"."""

    TS = "TS"
    TC = "TC"
    D3 = "3D"
    QC = "QC"
    AP = "AP"

    @classmethod
    def from_label(cls, label: str) -> "PredictorClass":
        try:
            return cls(label)
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise DatasetError(f"unknown predictor class {label!r} (expected one of {valid})")

    @property
    def label(self) -> str:
        return self.value


CLASS_ORDER: tuple[PredictorClass, ...] = tuple(PredictorClass)
ALL_CLASSES: frozenset[PredictorClass] = frozenset(PredictorClass)


@dataclass(frozen=True)
class Dataset:
    """Immutable container for one compound/predictor table.

    Attributes
    ----------
    compound_ids : tuple of str
        Row identifiers, in file order.
    predictor_ids : tuple of str
        Column identifiers, in file order.
    values : ndarray of shape (m, n)
        Raw predictor values, marked read-only.
    response : ndarray of shape (m,)
        Binary class label per compound (0 or 1).
    class_map : dict
        Predictor id -> PredictorClass.
    """

    compound_ids: tuple[str, ...]
    predictor_ids: tuple[str, ...]
    values: np.ndarray
    response: np.ndarray
    class_map: dict[str, PredictorClass]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        values.flags.writeable = False
        response = np.array(self.response, dtype=np.int64, copy=True)
        response.flags.writeable = False
        object.__setattr__(self, "compound_ids", tuple(self.compound_ids))
        object.__setattr__(self, "predictor_ids", tuple(self.predictor_ids))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "response", response)
        object.__setattr__(self, "class_map", dict(self.class_map))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def predictor_classes(self) -> tuple[PredictorClass, ...]:
        """Class tag per column, in column order."""
        return tuple(self.class_map[p] for p in self.predictor_ids)


@dataclass
class ValidationReport:
    """Outcome of validate(); empty errors means the dataset is usable."""

    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.errors


def validate(d: Dataset) -> ValidationReport:
    """Check every structural invariant of a dataset.

    Pure: the dataset is not modified.  Each violation is reported with a
    location string naming the offending row or column.
    """
    report = ValidationReport()
    err = report.errors.append

    if d.m < 2:
        err(("dataset", f"need at least 2 compounds, found {d.m}"))
    if d.n < 1:
        err(("dataset", f"need at least 1 predictor, found {d.n}"))
    if d.values.shape != (len(d.compound_ids), len(d.predictor_ids)):
        err(("dataset", "value matrix shape does not match id counts"))

    seen: set[str] = set()
    for cid in d.compound_ids:
        if cid in seen:
            err((f"compound {cid}", "duplicate compound id"))
        seen.add(cid)
    seen = set()
    for pid in d.predictor_ids:
        if pid in seen:
            err((f"predictor {pid}", "duplicate predictor id"))
        seen.add(pid)

    if len(d.response) != d.m:
        err(("response", f"length {len(d.response)} does not match {d.m} compounds"))
    else:
        for cid, r in zip(d.compound_ids, d.response):
            if r not in (0, 1):
                err((f"compound {cid}", f"response {r} not in {{0, 1}}"))

    bad = np.argwhere(~np.isfinite(d.values))
    for i, j in bad:
        err((f"compound {d.compound_ids[i]}, predictor {d.predictor_ids[j]}", "non-finite value"))

    for pid in d.predictor_ids:
        if pid not in d.class_map:
            err((f"predictor {pid}", "missing class tag"))
    extra = set(d.class_map) - set(d.predictor_ids)
    for pid in sorted(extra):
        report.warnings.append((f"predictor {pid}", "class tag without matching matrix column"))

    return report


def _read_rows(path: Path) -> list[list[str]]:
    if not path.exists():
        raise DatasetError(f"file not found: {path}")
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row]


def load_dataset(matrix_path: str | Path, classmap_path: str | Path) -> Dataset:
    """Load and validate a dataset from a matrix CSV and a class-map CSV.

    The matrix header is ``compound_id,response,<predictor ids...>``; the
    class map header is ``predictor_id,class``.  Any malformed cell raises
    DatasetError naming the offending row and column.
    """
    matrix_path = Path(matrix_path)
    classmap_path = Path(classmap_path)

    rows = _read_rows(matrix_path)
    if not rows:
        raise DatasetError(f"{matrix_path}: empty file")
    header = rows[0]
    if len(header) < 3 or header[0] != "compound_id" or header[1] != "response":
        raise DatasetError(
            f"{matrix_path}: malformed header, expected 'compound_id,response,<predictor ids>'"
        )
    predictor_ids = tuple(header[2:])

    compound_ids: list[str] = []
    response: list[int] = []
    values: list[list[float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DatasetError(
                f"{matrix_path}: row {lineno} has {len(row)} cells, expected {len(header)}"
            )
        cid = row[0]
        try:
            r = float(row[1])
        except ValueError:
            raise DatasetError(f"{matrix_path}: non-numeric response {row[1]!r} at row {cid!r}")
        if r not in (0.0, 1.0):
            raise DatasetError(f"{matrix_path}: response {row[1]!r} at row {cid!r} not in {{0, 1}}")
        vals = []
        for pid, cell in zip(predictor_ids, row[2:]):
            try:
                vals.append(float(cell))
            except ValueError:
                raise DatasetError(
                    f"{matrix_path}: non-numeric cell {cell!r} at row {cid!r}, column {pid!r}"
                )
        compound_ids.append(cid)
        response.append(int(r))
        values.append(vals)

    crows = _read_rows(classmap_path)
    if not crows or crows[0] != ["predictor_id", "class"]:
        raise DatasetError(f"{classmap_path}: malformed header, expected 'predictor_id,class'")
    class_map: dict[str, PredictorClass] = {}
    for lineno, row in enumerate(crows[1:], start=2):
        if len(row) != 2:
            raise DatasetError(f"{classmap_path}: row {lineno} has {len(row)} cells, expected 2")
        pid, label = row
        if pid in class_map:
            raise DatasetError(f"{classmap_path}: duplicate predictor id {pid!r}")
        class_map[pid] = PredictorClass.from_label(label)

    missing = [p for p in predictor_ids if p not in class_map]
    if missing:
        raise DatasetError(f"{classmap_path}: no class tag for predictors {missing}")
    extra = sorted(set(class_map) - set(predictor_ids))
    if extra:
        raise DatasetError(f"{classmap_path}: class tags for unknown predictors {extra}")

    d = Dataset(tuple(compound_ids), predictor_ids, np.array(values, dtype=np.float64),
                np.array(response), class_map)
    report = validate(d)
    if not report.is_valid:
        msgs = "; ".join(f"{loc}: {msg}" for loc, msg in report.errors)
        raise DatasetError(f"invalid dataset: {msgs}")
    return d


def save_dataset(d: Dataset, matrix_path: str | Path, classmap_path: str | Path) -> None:
    """Write a dataset back to the two-file CSV format.

    Floats are written with shortest round-trip decimal text, so a
    load-save-load cycle reproduces values bit-exactly.
    """
    with open(matrix_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["compound_id", "response", *d.predictor_ids])
        for i, cid in enumerate(d.compound_ids):
            w.writerow([cid, int(d.response[i]), *[repr(float(v)) for v in d.values[i]]])
    with open(classmap_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["predictor_id", "class"])
        for pid in d.predictor_ids:
            w.writerow([pid, d.class_map[pid].label])


def take_columns(d: Dataset, indices) -> Dataset:
    """New dataset keeping the given predictor columns, in the given order."""
    indices = list(indices)
    pids = tuple(d.predictor_ids[j] for j in indices)
    return Dataset(
        d.compound_ids,
        pids,
        d.values[:, indices],
        d.response,
        {p: d.class_map[p] for p in pids},
    )


def take_rows(d: Dataset, indices) -> Dataset:
    """New dataset keeping the given compound rows, in the given order."""
    indices = list(indices)
    return Dataset(
        tuple(d.compound_ids[i] for i in indices),
        d.predictor_ids,
        d.values[indices],
        d.response[indices],
        dict(d.class_map),
    )


def subset_by_class(d: Dataset, classes) -> Dataset:
    """Keep only predictors whose class tag is in ``classes``.

    Column order is preserved.  Raises DatasetError when the subset would be
    empty, and ValueError when ``classes`` itself is empty.
    """
    classes = frozenset(classes)
    if not classes:
        raise ValueError("classes must be a non-empty set")
    kept = [j for j, pid in enumerate(d.predictor_ids) if d.class_map[pid] in classes]
    if not kept:
        wanted = ", ".join(sorted(c.label for c in classes))
        raise DatasetError(f"no predictors with class in {{{wanted}}}")
    return take_columns(d, kept)
