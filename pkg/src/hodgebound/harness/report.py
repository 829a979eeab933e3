"""Persistence of sweep results: CSV tables, markdown reports, SVG plots."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

BIAS_NOTE = (
    "Conforming discretizations overestimate eigenvalues, which is the safe side "
    "for checks of the form computed >= bound; where an h ladder is available the "
    "extrapolated value is used instead of the finest-mesh value."
)


def _fmt(v) -> str:
    if isinstance(v, float):
        if v == 0 or (1e-3 <= abs(v) < 1e5):
            return f"{v:.6g}"
        return f"{v:.4e}"
    return str(v)


def columns(rows: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def write_csv(rows: Sequence[dict], path) -> None:
    cols = columns(rows)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, quoting=csv.QUOTE_MINIMAL)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_csv(path) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            row = {}
            for k, v in r.items():
                try:
                    row[k] = float(v)
                except (TypeError, ValueError):
                    row[k] = v
            out.append(row)
    return out


def markdown_table(rows: Sequence[dict], cols: Sequence[str] | None = None) -> str:
    cols = list(cols) if cols else columns(rows)
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for r in rows:
        lines.append("| " + " | ".join(_fmt(r.get(c, "")) for c in cols) + " |")
    return "\n".join(lines)


def markdown_report(result) -> str:
    parts = [f"# {result.id}", "", f"kind: `{result.kind}`, runtime {result.runtime:.1f} s", ""]
    if result.rows:
        parts += ["## Rows", "", markdown_table(result.rows), ""]
    if result.slopes:
        parts += ["## Fitted log-log slopes", ""]
        for name, (s, e) in result.slopes.items():
            parts.append(f"- {name}: {s:.4f} +/- {e:.4f}")
        parts.append("")
    if result.checks:
        parts += ["## Checks", ""]
        for c in result.checks:
            parts.append(f"- {'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
        parts.append("")
    parts += ["## Notes", "", BIAS_NOTE, ""]
    return "\n".join(parts)


def svg_loglog(series: dict[str, list[tuple[float, float]]], path, title: str = "") -> None:
    """Minimal log-log line plot, one polyline per series."""
    pts = [p for s in series.values() for p in s if p[0] > 0 and p[1] > 0]
    if not pts:
        return
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    W, H, m = 480, 360, 50

    def X(v):
        return m + (math.log10(v) - x0) / (x1 - x0) * (W - 2 * m)

    def Y(v):
        return H - m - (math.log10(v) - y0) / (y1 - y0) * (H - 2 * m)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="{m / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{m}" y="{H - m / 3}" font-size="11">10^{x0:.2f}</text>',
        f'<text x="{W - m}" y="{H - m / 3}" font-size="11" text-anchor="end">10^{x1:.2f}</text>',
        f'<text x="4" y="{H - m}" font-size="11">10^{y0:.2f}</text>',
        f'<text x="4" y="{m}" font-size="11">10^{y1:.2f}</text>',
    ]
    for i, (name, s) in enumerate(series.items()):
        s = sorted(p for p in s if p[0] > 0 and p[1] > 0)
        c = colors[i % len(colors)]
        poly = " ".join(f"{X(a):.1f},{Y(b):.1f}" for a, b in s)
        out.append(f'<polyline points="{poly}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        for a, b in s:
            out.append(f'<circle cx="{X(a):.1f}" cy="{Y(b):.1f}" r="3" fill="{c}"/>')
        out.append(f'<text x="{W - m - 4}" y="{m + 16 * (i + 1)}" text-anchor="end" font-size="12" fill="{c}">{name}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out))
