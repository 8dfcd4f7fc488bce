"""End-to-end orchestration and report assembly.

Stages: errors -> labels -> evidence sets -> Shapley scores -> reordering ->
top-K insights -> evaluation. Every stage is also exposed on its own so the
CLI can run it against intermediate artifacts.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DimensionMismatch, InvalidAlpha, InvalidK
from .evaluation import (
    apply_order,
    criteria_correlations_lenient,
    frequency_col_order,
    frequency_row_order,
    topleft_capture,
)
from .insights import DEFAULT_ALPHA, DEFAULT_K, Insight, Reordering, extract_top_k, reorder
from .labeling import baseline_errors, label_from_errors, normalize_errors
from .shapley import EvidenceSets, ShapleyScores, build_evidence_sets, compute_scores, rank_ascending
from .table import ErrorMatrix, LabelMatrix, Table, load_error_matrix, load_label_matrix, load_table

REPORT_SCHEMA_VERSION = 1

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    input_table: str | None = None
    external_errors: str | None = None
    external_labels: str | None = None
    alpha: float = DEFAULT_ALPHA
    k: int = DEFAULT_K
    block_sizes: list[int] = field(default_factory=lambda: [2, 4, 6])
    weighted: bool = False
    ground_truth: str | None = None
    seed: int = 0
    output_dir: str = "."

    def validate(self) -> None:
        if not (self.input_table or self.external_errors or self.external_labels):
            raise ConfigError("one of --input, --errors or --labels is required")
        if self.external_errors and self.external_labels and not self.weighted:
            raise ConfigError("--errors and --labels both drive labeling; pass only one (or add --weighted)")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise InvalidAlpha(f"alpha must be positive, got {self.alpha}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise InvalidK(f"k must be a positive integer, got {self.k}")
        if any(b < 1 for b in self.block_sizes):
            raise ConfigError("block sizes must be positive")


@dataclass
class Inputs:
    table: Table | None
    errors: ErrorMatrix | None
    labels: LabelMatrix | None
    ground_truth: LabelMatrix | None
    fingerprint: str
    shape: tuple[int, int]

    @property
    def record_ids(self) -> tuple:
        return self.table.record_ids if self.table is not None else tuple(range(self.shape[0]))

    @property
    def attribute_names(self) -> tuple:
        if self.table is not None:
            return tuple(self.table.attribute_names)
        return tuple(f"a{j}" for j in range(self.shape[1]))


def _fingerprint(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            h.update(b"\0")
            continue
        data = Path(p).read_bytes()
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def load_inputs(cfg: PipelineConfig) -> Inputs:
    table = load_table(cfg.input_table) if cfg.input_table else None
    dims = table.shape if table is not None else None
    errors = load_error_matrix(cfg.external_errors, dims) if cfg.external_errors else None
    if dims is None and errors is not None:
        dims = errors.shape
    labels = load_label_matrix(cfg.external_labels, dims) if cfg.external_labels else None
    if dims is None and labels is not None:
        dims = labels.shape
    truth = load_label_matrix(cfg.ground_truth, dims) if cfg.ground_truth else None
    fp = _fingerprint([cfg.input_table, cfg.external_errors, cfg.external_labels, cfg.ground_truth])
    return Inputs(table, errors, labels, truth, fp, tuple(int(d) for d in dims))


@dataclass
class LabelingResult:
    labels: LabelMatrix
    errors: ErrorMatrix | None  # normalized errors, when errors exist
    record_predictions: np.ndarray | None
    source: str


def _schema(inputs: Inputs):
    return inputs.table.schema if inputs.table is not None else [None] * inputs.shape[1]


def run_labeling(inputs: Inputs) -> LabelingResult:
    if inputs.labels is not None:
        norm = normalize_errors(inputs.errors, _schema(inputs)) if inputs.errors is not None else None
        return LabelingResult(inputs.labels, norm, None, "labels")
    if inputs.errors is not None:
        raw, source = inputs.errors, "errors"
    else:
        raw, source = baseline_errors(inputs.table), "estimator"
    labels, norm, rl = label_from_errors(raw, _schema(inputs))
    log.info("labeling from %s: %d anomalous records, %d PA cells", source, int(rl.predictions.sum()), int(labels.pa.sum()))
    return LabelingResult(labels, norm, rl.predictions, source)


def _ranks(scores) -> list[int]:
    ranks = np.empty(len(scores), dtype=int)
    ranks[rank_ascending(scores)] = np.arange(1, len(scores) + 1)
    return ranks.tolist()


def _plain(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def insight_dict(ins: Insight) -> dict:
    return {
        "rank": ins.rank,
        "rows": [ins.rect.top, ins.rect.bottom],
        "cols": [ins.rect.left, ins.rect.right],
        "score_sum": float(ins.score_sum),
        "pa_count": ins.pa_count,
        "na_count": ins.na_count,
        "record_ids": [_plain(r) for r in ins.record_ids],
        "attribute_names": list(ins.attribute_names),
    }


def scores_dict(scores: ShapleyScores, ev: EvidenceSets, inputs: Inputs) -> dict:
    return {
        "weighted": scores.weighted,
        "attributes": [
            {"name": name, "score": float(s), "rank": r, "evidence_size": int(c)}
            for name, s, r, c in zip(inputs.attribute_names, scores.attribute_values,
                                     _ranks(scores.attribute_values), ev.attribute_na_count)
        ],
        "records": [
            {"id": _plain(rid), "score": float(s), "rank": r}
            for rid, s, r in zip(inputs.record_ids, scores.record_values, _ranks(scores.record_values))
        ],
    }


def _capture(matrix, sizes, n, m) -> dict:
    usable = [k for k in sizes if k <= min(n, m)]
    skipped = [k for k in sizes if k > min(n, m)]
    rep = topleft_capture(matrix, usable)
    return {
        "block_sizes": list(rep.block_sizes),
        "counts": list(rep.counts),
        "total_anomalies": rep.total_anomalies,
        "skipped_block_sizes": skipped,
    }


def evaluation_dict(r: Reordering, labels: LabelMatrix, truth: LabelMatrix | None, sizes) -> dict:
    n, m = labels.shape
    out = {"labels_capture": _capture(r.reordered_labels, sizes, n, m)}
    if truth is not None:
        if truth.shape != labels.shape:
            raise DimensionMismatch("ground truth does not match the label matrix")
        freq = apply_order(truth, frequency_row_order(labels), frequency_col_order(labels))
        out["ground_truth"] = {
            "tab_shapley": _capture(apply_order(truth, r.row_perm, r.col_perm), sizes, n, m),
            "frequency_baseline": _capture(freq, sizes, n, m),
        }
    return out


def config_dict(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    d["block_sizes"] = list(cfg.block_sizes)
    return d


def run_pipeline(cfg: PipelineConfig) -> dict:
    cfg.validate()
    inputs = load_inputs(cfg)
    if cfg.weighted and inputs.errors is None and inputs.table is None:
        raise ConfigError("--weighted needs error values: pass --errors or --input")
    lab = run_labeling(inputs)
    ev = build_evidence_sets(lab.labels)
    weights = lab.errors
    if cfg.weighted and weights is None:
        # external labels with a table but no error file: weight by the estimator
        weights = normalize_errors(baseline_errors(inputs.table), inputs.table.schema)
    scores = compute_scores(ev, weights, cfg.weighted)
    r = reorder(lab.labels, scores, inputs.record_ids, inputs.attribute_names)
    insights = extract_top_k(r, int(cfg.k), cfg.alpha)
    crit = criteria_correlations_lenient(scores, ev) if ev.shape[1] >= 2 else None
    n, m = lab.labels.shape
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "dataset": {"n": n, "m": m, "sha256": inputs.fingerprint},
        "config": config_dict(cfg),
        "labeling": {
            "source": lab.source,
            "anomalous_records": None if lab.record_predictions is None else int(lab.record_predictions.sum()),
            "pa_cells": int(lab.labels.pa.sum()),
        },
        **scores_dict(scores, ev, inputs),
        "reordering": {
            "row_perm": [int(i) for i in r.row_perm],
            "col_perm": [int(j) for j in r.col_perm],
            "labels": ["".join("1" if x else "0" for x in row) for row in r.reordered_labels.pa],
        },
        "insights": [insight_dict(i) for i in insights],
        "evaluation": evaluation_dict(r, lab.labels, inputs.ground_truth, cfg.block_sizes),
        "correlations": {
            "r1": None if crit is None else crit.r1,
            "r2a": None if crit is None else crit.r2a,
            "r2b": None if crit is None else crit.r2b,
        },
    }
    return report
