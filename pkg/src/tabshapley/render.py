"""Static SVG heatmap of a reordered label matrix with insight outlines.

The SVG is written by hand so the bytes depend only on the report.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

CELL = 12
MARGIN = 4
PA_FILL = "#2f2f5f"
NA_FILL = "#ecebf3"
OUTLINES = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def render_svg(report: dict, cell: int = CELL, show_names: bool = True) -> str:
    rows = report["reordering"]["labels"]
    n = len(rows)
    m = len(rows[0]) if n else 0
    names = []
    if show_names:
        by_index = [a["name"] for a in report.get("attributes", [])]
        names = [by_index[j] for j in report["reordering"]["col_perm"]] if by_index else []
    header = 0
    if names:
        header = 6 * max(len(str(x)) for x in names) + MARGIN
    width = 2 * MARGIN + m * cell
    height = 2 * MARGIN + header + n * cell
    ox, oy = MARGIN, MARGIN + header

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="4" stroke="#1f77b4" '
        'stroke-width="1.5" stroke-opacity="0.6"/></pattern></defs>',
        '<g class="grid">',
    ]
    for i, row in enumerate(rows):
        for j, ch in enumerate(row):
            pa = ch == "1"
            out.append(
                f'<rect class="cell {"pa" if pa else "na"}" x="{ox + j * cell}" y="{oy + i * cell}" '
                f'width="{cell}" height="{cell}" fill="{PA_FILL if pa else NA_FILL}"/>'
            )
    out.append("</g>")
    if names:
        out.append('<g class="names" font-family="monospace" font-size="9">')
        for j, name in enumerate(names):
            x = ox + j * cell + cell // 2 + 3
            y = oy - 2
            out.append(f'<text x="{x}" y="{y}" transform="rotate(-90 {x} {y})">{escape(str(name))}</text>')
        out.append("</g>")
    out.append('<g class="insights">')
    for ins in report.get("insights", []):
        top, bottom = ins["rows"]
        left, right = ins["cols"]
        color = OUTLINES[(ins["rank"] - 1) % len(OUTLINES)]
        out.append(
            f'<rect class="insight" data-rank="{ins["rank"]}" x="{ox + left * cell}" y="{oy + top * cell}" '
            f'width="{(right - left + 1) * cell}" height="{(bottom - top + 1) * cell}" '
            f'fill="url(#hatch)" stroke="{color}" stroke-width="2"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
