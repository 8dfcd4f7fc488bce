"""Evaluation harness: top-left capture, frequency baseline, correlations,
alpha sweeps and planted-block synthetic data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlockTooLarge, LengthMismatch, NotDefined
from .insights import Reordering, extract_top_k, _check_alpha
from .shapley import EvidenceSets, ShapleyScores
from .table import AttributeSchema, Kind, LabelMatrix, Table

SYNTHETIC_SHIFT = 4.0


@dataclass(frozen=True)
class CaptureReport:
    block_sizes: tuple[int, ...]
    counts: tuple[int, ...]
    total_anomalies: int

    def as_dict(self) -> dict:
        return {str(k): c for k, c in zip(self.block_sizes, self.counts)}


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 10
    m: int = 8
    block_rows: int = 3
    block_cols: int = 2
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.block_rows <= self.n and 1 <= self.block_cols <= self.m):
            raise ValueError("planted block must fit inside the matrix")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must lie in [0, 1)")


@dataclass(frozen=True)
class AlphaSweepPoint:
    alpha: float
    na_cells: int
    na_fraction: float
    weighted_na_penalty: float
    insight_area: int


def topleft_capture(matrix, ks) -> CaptureReport:
    """Count anomalous cells in the leading k x k block for each k.

    ``matrix`` is a LabelMatrix or boolean array already in reordered
    coordinates; True/PA counts as anomalous.
    """
    pa = matrix.pa if isinstance(matrix, LabelMatrix) else np.asarray(matrix, dtype=bool)
    n, m = pa.shape
    ks = tuple(int(k) for k in ks)
    for k in ks:
        if k < 1 or k > min(n, m):
            raise BlockTooLarge(f"block size {k} does not fit a {n}x{m} matrix")
    return CaptureReport(ks, tuple(int(pa[:k, :k].sum()) for k in ks), int(pa.sum()))


def frequency_row_order(labels: LabelMatrix) -> np.ndarray:
    """Rows by descending PA count, ties by index."""
    return np.argsort(-labels.pa.sum(axis=1), kind="stable")


def frequency_col_order(labels: LabelMatrix) -> np.ndarray:
    return np.argsort(-labels.pa.sum(axis=0), kind="stable")


def apply_order(matrix, rows, cols) -> np.ndarray:
    pa = matrix.pa if isinstance(matrix, LabelMatrix) else np.asarray(matrix, dtype=bool)
    return pa[np.ix_(rows, cols)]


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise NotDefined("correlation undefined for a constant input")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


@dataclass(frozen=True)
class CriteriaCorrelations:
    r1: float | None
    r2a: float | None
    r2b: float | None


def exclusive_record_counts(ev: EvidenceSets) -> np.ndarray:
    """Per attribute, how many of its evidence records sit in no other evidence set."""
    only_one = ev.record_na_count == 1
    return (ev.na & only_one[:, None]).sum(axis=0)


def criteria_correlations(scores: ShapleyScores, ev: EvidenceSets) -> tuple[float, float, float]:
    """Correlate attribute values with evidence-set size and exclusive-record count.

    ``r2b`` counts distinct records in each evidence set, which for sets equals
    the size, so it always matches ``r1``. Raises NotDefined like ``pearson``.
    """
    phi = scores.attribute_values
    if len(phi) < 2:
        raise LengthMismatch("need at least two attributes")
    sizes = ev.attribute_na_count
    r1 = pearson(phi, sizes)
    r2a = pearson(phi, exclusive_record_counts(ev))
    distinct = np.array([len(s) for s in ev.attribute_sets])
    r2b = pearson(phi, distinct)
    return r1, r2a, r2b


def criteria_correlations_lenient(scores: ShapleyScores, ev: EvidenceSets) -> CriteriaCorrelations:
    """Same as criteria_correlations, but undefined entries come back as None."""
    phi = scores.attribute_values
    vectors = (ev.attribute_na_count, exclusive_record_counts(ev), np.array([len(s) for s in ev.attribute_sets]))
    out = []
    for v in vectors:
        try:
            out.append(pearson(phi, v))
        except (NotDefined, LengthMismatch):
            out.append(None)
    return CriteriaCorrelations(*out)


def top1_na_stats(r: Reordering, alpha: float) -> AlphaSweepPoint:
    insights = extract_top_k(r, 1, alpha)
    if not insights:
        return AlphaSweepPoint(alpha, 0, 0.0, 0.0, 0)
    rect = insights[0].rect
    n, m = r.reordered_labels.shape
    rows, cols = rect.slices()
    na = r.reordered_labels.na[rows, cols]
    ii, jj = np.nonzero(na)
    decay = (ii + rect.top) * (jj + rect.left) / (n * m)
    penalty = float(np.sum(1.0 - decay))
    count = int(na.sum())
    return AlphaSweepPoint(alpha, count, count / rect.area, penalty, rect.area)


def alpha_sweep(r: Reordering, alphas) -> list[AlphaSweepPoint]:
    alphas = [_check_alpha(a) for a in alphas]
    return [top1_na_stats(r, a) for a in alphas]


def _draw(spec: SyntheticSpec):
    rng = np.random.default_rng(spec.seed)
    rows = np.sort(rng.choice(spec.n, spec.block_rows, replace=False))
    cols = np.sort(rng.choice(spec.m, spec.block_cols, replace=False))
    block = np.zeros((spec.n, spec.m), dtype=bool)
    block[np.ix_(rows, cols)] = True
    flips = rng.random((spec.n, spec.m)) < spec.noise_rate
    truth = block ^ flips
    values = rng.standard_normal((spec.n, spec.m)) + SYNTHETIC_SHIFT * truth
    return block, truth, values


def planted_block(spec: SyntheticSpec) -> np.ndarray:
    """Boolean mask of the designated block, before any label noise."""
    return _draw(spec)[0]


def generate_synthetic(spec: SyntheticSpec) -> tuple[Table, LabelMatrix]:
    """Continuous table with a planted anomalous block.

    Anomalous cells (the block, with flips at ``noise_rate`` in both
    directions) are drawn from N(4, 1), the rest from N(0, 1). The ground
    truth marks exactly those cells PA.
    """
    _, truth, values = _draw(spec)
    schema = tuple(AttributeSchema(f"x{j}", Kind.CONTINUOUS) for j in range(spec.m))
    return Table(schema, values), LabelMatrix(truth)


def format_key_values(report: dict, prefix: str = "") -> str:
    """Flatten a nested dict into ``key=value`` lines, keys dotted."""
    lines = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(format_key_values(value, name + ".").rstrip("\n"))
        elif isinstance(value, (list, tuple)) and any(isinstance(v, dict) for v in value):
            for idx, item in enumerate(value):
                lines.append(format_key_values(item, f"{name}.{idx}.").rstrip("\n"))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{name}={','.join(_fmt(v) for v in value)}")
        else:
            lines.append(f"{name}={_fmt(value)}")
    return "\n".join(l for l in lines if l) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)
