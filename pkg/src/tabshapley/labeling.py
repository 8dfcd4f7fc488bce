"""PA/NA cell labeling from per-cell reconstruction errors.

Records are thresholded first (two-cluster k-means over mean record loss);
cells of anomalous records are then split by a per-row two-cluster k-means.
Everything here is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .table import STD_FLOOR, AttributeSchema, ErrorMatrix, LabelMatrix, Table, standardize_columns
from .errors import DimensionMismatch

DEFAULT_MAX_ITERS = 100


@dataclass(frozen=True)
class KMeans2Result:
    assignment: np.ndarray  # True = high cluster
    centroid_low: float
    centroid_high: float

    @property
    def threshold(self) -> float:
        return 0.5 * (self.centroid_low + self.centroid_high)


@dataclass(frozen=True)
class RecordLossVector:
    losses: np.ndarray
    predictions: np.ndarray | None = None


def kmeans2(values, max_iters: int = DEFAULT_MAX_ITERS) -> KMeans2Result:
    """Lloyd's algorithm with k=2 on 1-D data, seeded at (min, max).

    A point exactly at the midpoint of the two centroids goes to the low
    cluster. All-equal input puts everything in the low cluster.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("kmeans2 needs at least one value")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return KMeans2Result(np.zeros(x.size, dtype=bool), lo, lo)
    assign = x > 0.5 * (lo + hi)
    for _ in range(max_iters):
        lo, hi = float(x[~assign].mean()), float(x[assign].mean())
        new = x > 0.5 * (lo + hi)
        if np.array_equal(new, assign):
            break
        assign = new
    return KMeans2Result(assign, lo, hi)


def normalize_errors(e: ErrorMatrix, schema) -> ErrorMatrix:
    """Make error columns comparable across attributes.

    Continuous columns are standardized and shifted so their minimum is 0;
    categorical columns are divided by their maximum (all-zero stays zero).
    """
    schema = list(schema)
    v = np.array(e.values)
    if v.shape[1] != len(schema):
        raise DimensionMismatch(f"error matrix has {v.shape[1]} columns, schema has {len(schema)}")
    cat = np.array([isinstance(a, AttributeSchema) and a.is_categorical for a in schema])
    if (~cat).any():
        z = standardize_columns(v[:, ~cat])
        v[:, ~cat] = z - z.min(axis=0)
    if cat.any():
        col = v[:, cat]
        mx = col.max(axis=0)
        v[:, cat] = np.where(mx > 0, col / np.where(mx > 0, mx, 1.0), 0.0)
    return ErrorMatrix(np.maximum(v, 0.0))


def record_losses(e: ErrorMatrix) -> RecordLossVector:
    return RecordLossVector(e.values.mean(axis=1))


def label_records(losses: RecordLossVector, max_iters: int = DEFAULT_MAX_ITERS) -> RecordLossVector:
    km = kmeans2(losses.losses, max_iters)
    return RecordLossVector(losses.losses, km.assignment.astype(np.int8))


def label_cells(e: ErrorMatrix, predictions, max_iters: int = DEFAULT_MAX_ITERS) -> LabelMatrix:
    pred = np.asarray(predictions).astype(bool)
    n, m = e.shape
    if pred.shape != (n,):
        raise DimensionMismatch(f"{pred.size} record predictions for {n} records")
    pa = np.zeros((n, m), dtype=bool)
    for i in np.flatnonzero(pred):
        pa[i] = kmeans2(e.values[i], max_iters).assignment
    return LabelMatrix(pa)


def label_from_errors(e: ErrorMatrix, schema, max_iters: int = DEFAULT_MAX_ITERS):
    """Normalize, threshold records, then threshold cells.

    Returns ``(labels, normalized_errors, record_loss_vector)``.
    """
    norm = normalize_errors(e, schema)
    rl = label_records(record_losses(norm), max_iters)
    return label_cells(norm, rl.predictions, max_iters), norm, rl


def baseline_errors(t: Table) -> ErrorMatrix:
    """Cheap stand-in for a learned reconstruction model.

    Continuous cells score the squared z-score against the column mean;
    categorical cells score the surprise ``-log p`` of their category under
    add-one smoothed frequencies.
    """
    n, m = t.shape
    out = np.empty((n, m))
    for j, attr in enumerate(t.schema):
        col = t.values[:, j]
        if attr.is_categorical:
            idx = col.astype(int)
            counts = np.bincount(idx, minlength=len(attr.categories))
            p = (counts + 1.0) / (n + len(attr.categories))
            out[:, j] = -np.log(p[idx])
        elif n < 2:
            out[:, j] = 0.0
        else:
            z = (col - col.mean()) / max(col.std(ddof=1), STD_FLOOR)
            out[:, j] = z * z
    return ErrorMatrix(np.maximum(out, 0.0))
