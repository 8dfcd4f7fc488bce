"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 configuration error.
Diagnostics go to stderr (verbosity from TABSHAPLEY_LOG); reports go to files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, InputError, TabShapleyError
from .evaluation import SyntheticSpec, criteria_correlations_lenient, format_key_values, generate_synthetic
from .insights import DEFAULT_ALPHA, DEFAULT_K, extract_top_k, reorder
from .pipeline import (
    REPORT_SCHEMA_VERSION,
    PipelineConfig,
    config_dict,
    evaluation_dict,
    insight_dict,
    load_inputs,
    run_labeling,
    run_pipeline,
    scores_dict,
)
from .render import render_svg
from .shapley import build_evidence_sets, compute_scores
from .table import write_matrix, write_table

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

log = logging.getLogger("tabshapley")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _block_sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="input_table", help="delimited table with header row")
    common.add_argument("--errors", dest="external_errors", help="per-cell error matrix (no header)")
    common.add_argument("--labels", dest="external_labels", help="0/1 label matrix, 1 = PA (no header)")
    common.add_argument("--ground-truth", dest="ground_truth", help="0/1 ground-truth anomaly matrix")
    common.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="NA penalty scale (default %(default)s)")
    common.add_argument("--k", type=int, default=DEFAULT_K, help="number of insights (default %(default)s)")
    common.add_argument("--block-sizes", type=_block_sizes, default=[2, 4, 6],
                        help="top-left capture sizes, comma separated (default 2,4,6)")
    common.add_argument("--weighted", action="store_true", help="score with error-weighted Shapley values")
    common.add_argument("--seed", type=int, default=0, help="recorded in the report; the pipeline draws no random numbers")
    common.add_argument("--output-dir", default=".", help="where reports are written")
    common.add_argument("--format", choices=["json", "text"], default="json")

    parser = _Parser(prog="tabshapley", description="Top-K data quality insights for tabular data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("pipeline", parents=[common], help="label, score, reorder, extract and evaluate")
    sub.add_parser("label", parents=[common], help="write the PA/NA label matrix")
    sub.add_parser("score", parents=[common], help="write attribute and record Shapley scores")
    sub.add_parser("insights", parents=[common], help="write the reordering and top-K insights")
    sub.add_parser("eval", parents=[common], help="capture counts against ground truth")
    render = sub.add_parser("render", help="SVG heatmap of a pipeline report")
    render.add_argument("report", help="report.json written by the pipeline command")
    render.add_argument("--output", help="SVG path (default: heatmap.svg beside the report)")
    render.add_argument("--cell-size", type=int, default=12)
    render.add_argument("--no-names", action="store_true", help="omit attribute names")
    synth = sub.add_parser("synth", help="write a planted-block synthetic table and its ground truth")
    synth.add_argument("--n", type=int, default=10)
    synth.add_argument("--m", type=int, default=8)
    synth.add_argument("--block-rows", type=int, default=3)
    synth.add_argument("--block-cols", type=int, default=2)
    synth.add_argument("--noise", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0, help="seed for block placement, noise and values")
    synth.add_argument("--output-dir", default=".")
    return parser


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        input_table=args.input_table,
        external_errors=args.external_errors,
        external_labels=args.external_labels,
        alpha=args.alpha,
        k=args.k,
        block_sizes=args.block_sizes,
        weighted=args.weighted,
        ground_truth=args.ground_truth,
        seed=args.seed,
        output_dir=args.output_dir,
    )


def _write_report(report: dict, out_dir: Path, stem: str, fmt: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "text":
        path = out_dir / f"{stem}.txt"
        path.write_text(format_key_values(report), encoding="utf-8")
    else:
        path = out_dir / f"{stem}.json"
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return path


def _header(cfg: PipelineConfig, inputs) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "dataset": {"n": inputs.shape[0], "m": inputs.shape[1], "sha256": inputs.fingerprint},
        "config": config_dict(cfg),
    }


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    report = run_pipeline(cfg)
    out_dir = Path(cfg.output_dir)
    path = _write_report(report, out_dir, "report", args.format)
    rows = report["reordering"]["labels"]
    write_matrix([[c == "1" for c in row] for row in rows], out_dir / "labels_reordered.csv")
    log.info("wrote %s", path)
    return EXIT_OK


def _stage_inputs(args):
    cfg = _config(args)
    cfg.validate()
    return cfg, load_inputs(cfg)


def cmd_label(args) -> int:
    cfg, inputs = _stage_inputs(args)
    if inputs.labels is not None:
        raise ConfigError("label needs --input or --errors, not --labels")
    lab = run_labeling(inputs)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matrix(lab.labels.pa, out_dir / "labels.csv")
    write_matrix(lab.errors.values, out_dir / "errors_normalized.csv")
    write_matrix(lab.record_predictions.astype(bool)[:, None], out_dir / "record_predictions.csv")
    return EXIT_OK


def _scored(cfg, inputs):
    lab = run_labeling(inputs)
    ev = build_evidence_sets(lab.labels)
    if cfg.weighted and lab.errors is None:
        raise ConfigError("--weighted needs --errors (or --input without --labels)")
    return lab, ev, compute_scores(ev, lab.errors, cfg.weighted)


def cmd_score(args) -> int:
    cfg, inputs = _stage_inputs(args)
    _, ev, scores = _scored(cfg, inputs)
    report = {**_header(cfg, inputs), **scores_dict(scores, ev, inputs)}
    _write_report(report, Path(cfg.output_dir), "scores", args.format)
    return EXIT_OK


def cmd_insights(args) -> int:
    cfg, inputs = _stage_inputs(args)
    lab, ev, scores = _scored(cfg, inputs)
    r = reorder(lab.labels, scores, inputs.record_ids, inputs.attribute_names)
    insights = extract_top_k(r, cfg.k, cfg.alpha)
    report = {
        **_header(cfg, inputs),
        "reordering": {"row_perm": [int(i) for i in r.row_perm], "col_perm": [int(j) for j in r.col_perm]},
        "insights": [insight_dict(i) for i in insights],
    }
    _write_report(report, Path(cfg.output_dir), "insights", args.format)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg, inputs = _stage_inputs(args)
    if inputs.ground_truth is None:
        raise ConfigError("eval needs --ground-truth")
    lab, ev, scores = _scored(cfg, inputs)
    r = reorder(lab.labels, scores, inputs.record_ids, inputs.attribute_names)
    crit = criteria_correlations_lenient(scores, ev) if ev.shape[1] >= 2 else None
    report = {
        **_header(cfg, inputs),
        **evaluation_dict(r, lab.labels, inputs.ground_truth, cfg.block_sizes),
        "correlations": {
            "r1": None if crit is None else crit.r1,
            "r2a": None if crit is None else crit.r2a,
            "r2b": None if crit is None else crit.r2b,
        },
    }
    _write_report(report, Path(cfg.output_dir), "eval", args.format)
    return EXIT_OK


def cmd_render(args) -> int:
    path = Path(args.report)
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
        rows = report["reordering"]["labels"]
        if not isinstance(rows, list):
            raise TypeError("reordering.labels must be a list")
        svg = render_svg(report, cell=args.cell_size, show_names=not args.no_names)
    except (OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"cannot render report: {exc}", path=path) from exc
    out = Path(args.output) if args.output else path.with_name("heatmap.svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(svg.encode("utf-8"))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(args.n, args.m, args.block_rows, args.block_cols, args.noise, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    table, truth = generate_synthetic(spec)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(table, out_dir / "table.csv")
    write_matrix(truth.pa, out_dir / "truth.csv")
    return EXIT_OK


COMMANDS = {
    "pipeline": cmd_pipeline,
    "label": cmd_label,
    "score": cmd_score,
    "insights": cmd_insights,
    "eval": cmd_eval,
    "render": cmd_render,
    "synth": cmd_synth,
}


def _setup_logging() -> None:
    level = os.environ.get("TABSHAPLEY_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"tabshapley: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, TabShapleyError) as exc:
        print(f"tabshapley: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"tabshapley: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
