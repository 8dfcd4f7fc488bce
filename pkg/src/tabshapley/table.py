"""Tabular data model and file I/O.

Tables are delimiter-separated text with a mandatory header row. Numeric
matrix files (errors, labels, ground truth) have no header: one row per line,
comma-separated decimals.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateAttributeName,
    EmptyTable,
    InputError,
    MissingCell,
    NegativeError,
    NonFiniteError,
    UnparseableLabel,
    UnparseableValue,
)

STD_FLOOR = 1e-12


class Kind(enum.Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: Kind
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name:
            raise InputError("attribute name must be non-empty")
        if self.kind is Kind.CATEGORICAL:
            if not self.categories:
                raise InputError(f"categorical attribute {self.name!r} needs at least one category")
            if len(set(self.categories)) != len(self.categories):
                raise InputError(f"categorical attribute {self.name!r} has repeated categories")
        elif self.categories is not None:
            raise InputError(f"continuous attribute {self.name!r} cannot carry categories")

    @property
    def is_categorical(self) -> bool:
        return self.kind is Kind.CATEGORICAL


@dataclass(frozen=True, eq=False)
class Table:
    """n records by m attributes.

    ``values`` is a float array; categorical cells hold the category index.
    """

    schema: tuple[AttributeSchema, ...]
    values: np.ndarray
    record_ids: tuple = field(default=())

    def __post_init__(self):
        schema = tuple(self.schema)
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise EmptyTable("table must have at least one record and one attribute")
        n, m = values.shape
        if len(schema) != m:
            raise DimensionMismatch(f"schema has {len(schema)} attributes but rows have {m} cells")
        names = [a.name for a in schema]
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise DuplicateAttributeName(f"duplicate attribute name {dup!r}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("table contains non-finite values")
        for j, attr in enumerate(schema):
            if attr.is_categorical:
                col = values[:, j]
                bad = (col != np.round(col)) | (col < 0) | (col >= len(attr.categories))
                if bad.any():
                    i = int(np.flatnonzero(bad)[0])
                    raise UnparseableValue("category index out of range", row=i, column=attr.name)
        ids = tuple(self.record_ids) if len(self.record_ids) else tuple(range(n))
        if len(ids) != n:
            raise DimensionMismatch(f"{len(ids)} record ids for {n} records")
        if len(set(ids)) != n:
            raise InputError("record ids must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "record_ids", ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.schema]

    @property
    def continuous_mask(self) -> np.ndarray:
        return np.array([not a.is_categorical for a in self.schema])

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.record_ids == other.record_ids
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ErrorMatrix:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise EmptyTable("error matrix must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteError("non-finite error value", row=int(i), column=int(j))
        if (values < 0).any():
            i, j = np.argwhere(values < 0)[0]
            raise NegativeError("negative error value", row=int(i), column=int(j))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Cell labels; ``pa[i, j]`` is True for PA and False for NA."""

    pa: np.ndarray

    def __post_init__(self):
        pa = np.array(self.pa, dtype=bool)
        if pa.ndim != 2 or pa.size == 0:
            raise EmptyTable("label matrix must be a non-empty 2-D matrix")
        pa.setflags(write=False)
        object.__setattr__(self, "pa", pa)

    @property
    def na(self) -> np.ndarray:
        return ~self.pa

    @property
    def shape(self) -> tuple[int, int]:
        return self.pa.shape

    def __eq__(self, other):
        if not isinstance(other, LabelMatrix):
            return NotImplemented
        return np.array_equal(self.pa, other.pa)

    __hash__ = None


def _parse_real(text: str) -> float | None:
    try:
        x = float(text)
    except ValueError:
        return None
    return x if math.isfinite(x) else None


def _detect_delimiter(header: str) -> str:
    if "\t" in header and "," not in header:
        return "\t"
    return ","


def _coerce_schema(schema_spec, names: list[str]) -> list[AttributeSchema | Kind | None]:
    if schema_spec is None:
        return [None] * len(names)
    if isinstance(schema_spec, Mapping):
        out = []
        for name in names:
            kind = schema_spec.get(name)
            out.append(Kind(kind) if isinstance(kind, str) else kind)
        return out
    schema_spec = list(schema_spec)
    if [a.name for a in schema_spec] != names:
        raise DimensionMismatch("schema does not match the file header")
    return schema_spec


def load_table(path, schema_spec=None) -> Table:
    """Load a delimiter-separated table with a header row.

    ``schema_spec`` may be omitted (types inferred), a mapping from column name
    to ``Kind`` or kind string (unlisted columns inferred), or a full sequence
    of ``AttributeSchema`` whose categories are used verbatim.

    Inference: a column is continuous iff every value parses as a finite real,
    otherwise categorical with categories in order of first appearance.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read table: {exc.strerror}", path=path) from exc
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise EmptyTable("table file is empty", path=path)
    delimiter = _detect_delimiter(lines[0])
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise EmptyTable("table has a header but no records", path=path)
    m = len(header)
    if any(not h for h in header):
        raise InputError("empty attribute name in header", path=path, row=0)
    seen = set()
    for h in header:
        if h in seen:
            raise DuplicateAttributeName(f"duplicate attribute name {h!r}", path=path, row=0)
        seen.add(h)
    for i, r in enumerate(body, start=1):
        if len(r) != m:
            raise MissingCell(f"expected {m} cells, found {len(r)}", path=path, row=i)
        for j, cell in enumerate(r):
            if not cell.strip():
                raise MissingCell("blank cell", path=path, row=i, column=header[j])

    declared = _coerce_schema(schema_spec, header)
    schema = []
    values = np.empty((len(body), m), dtype=float)
    for j, name in enumerate(header):
        raw = [r[j].strip() for r in body]
        spec = declared[j]
        if isinstance(spec, AttributeSchema):
            kind, cats = spec.kind, spec.categories
        else:
            kind, cats = spec, None
        if kind is None:
            kind = Kind.CONTINUOUS if all(_parse_real(c) is not None for c in raw) else Kind.CATEGORICAL
        if kind is Kind.CONTINUOUS:
            for i, c in enumerate(raw):
                x = _parse_real(c)
                if x is None:
                    raise UnparseableValue(f"{c!r} is not a real number", path=path, row=i + 1, column=name)
                values[i, j] = x
            schema.append(AttributeSchema(name, Kind.CONTINUOUS))
        else:
            if cats is None:
                cats = tuple(dict.fromkeys(raw))
            index = {c: k for k, c in enumerate(cats)}
            for i, c in enumerate(raw):
                if c not in index:
                    raise UnparseableValue(f"unknown category {c!r}", path=path, row=i + 1, column=name)
                values[i, j] = index[c]
            schema.append(AttributeSchema(name, Kind.CATEGORICAL, tuple(cats)))
    return Table(tuple(schema), values)


def write_table(t: Table, path, delimiter: str = ",") -> None:
    """Write ``t`` so that ``load_table(path, t.schema)`` reproduces it exactly."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(t.attribute_names)
        for row in t.values:
            cells = []
            for attr, x in zip(t.schema, row):
                cells.append(attr.categories[int(x)] if attr.is_categorical else repr(float(x)))
            w.writerow(cells)


def standardize_continuous(t: Table) -> Table:
    """Center continuous columns and scale by the sample standard deviation.

    Constant columns become all zeros; with a single record every continuous
    cell becomes 0. Categorical columns are left untouched.
    """
    values = np.array(t.values)
    cont = t.continuous_mask
    if cont.any():
        values[:, cont] = standardize_columns(values[:, cont])
    return Table(t.schema, values, t.record_ids)


def standardize_columns(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    centered = x - x.mean(axis=0)
    if n < 2:
        return np.zeros_like(x)
    std = x.std(axis=0, ddof=1)
    out = centered / np.maximum(std, STD_FLOOR)
    # an inexact mean leaves rounding residue in constant columns; don't amplify it
    out[:, np.ptp(x, axis=0) == 0] = 0.0
    return out


def _read_matrix_rows(path: Path) -> list[list[str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read matrix: {exc.strerror}", path=path) from exc
    rows = [line.split(",") for line in text.splitlines() if line.strip()]
    if not rows:
        raise EmptyTable("matrix file is empty", path=path)
    return rows


def _check_dims(rows, expected_dims, path):
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DimensionMismatch(f"row has {len(r)} entries, expected {width}", path=path, row=i)
    if expected_dims is not None and (len(rows), width) != tuple(expected_dims):
        raise DimensionMismatch(
            f"matrix is {len(rows)}x{width}, expected {expected_dims[0]}x{expected_dims[1]}", path=path
        )


def load_error_matrix(path, expected_dims=None) -> ErrorMatrix:
    rows = _read_matrix_rows(path)
    _check_dims(rows, expected_dims, path)
    values = np.empty((len(rows), len(rows[0])))
    for i, r in enumerate(rows):
        for j, cell in enumerate(r):
            cell = cell.strip()
            if not cell:
                raise MissingCell("blank entry", path=path, row=i, column=j)
            try:
                x = float(cell)
            except ValueError:
                raise UnparseableValue(f"{cell!r} is not a number", path=path, row=i, column=j) from None
            if not math.isfinite(x):
                raise NonFiniteError("non-finite error value", path=path, row=i, column=j)
            if x < 0:
                raise NegativeError("negative error value", path=path, row=i, column=j)
            values[i, j] = x
    return ErrorMatrix(values)


def load_label_matrix(path, expected_dims=None) -> LabelMatrix:
    """Load a 0/1 matrix; 1 means PA and 0 means NA."""
    rows = _read_matrix_rows(path)
    _check_dims(rows, expected_dims, path)
    pa = np.empty((len(rows), len(rows[0])), dtype=bool)
    for i, r in enumerate(rows):
        for j, cell in enumerate(r):
            cell = cell.strip()
            if cell in ("0", "1"):
                pa[i, j] = cell == "1"
            else:
                try:
                    x = float(cell)
                except ValueError:
                    x = None
                if x not in (0.0, 1.0):
                    raise UnparseableLabel(f"label must be 0 or 1, got {cell!r}", path=path, row=i, column=j)
                pa[i, j] = x == 1.0
    return LabelMatrix(pa)


def write_matrix(values: np.ndarray, path) -> None:
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8") as fh:
        for row in values:
            if values.dtype == bool:
                fh.write(",".join("1" if x else "0" for x in row))
            else:
                fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def check_dims(shape: tuple[int, int], expected: Sequence[int], what: str = "matrix") -> None:
    if tuple(shape) != tuple(expected):
        raise DimensionMismatch(f"{what} is {shape[0]}x{shape[1]}, expected {expected[0]}x{expected[1]}")
