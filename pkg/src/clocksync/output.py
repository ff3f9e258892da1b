"""Plot-ready output emission: CSV always, simple SVG line plots optionally.

CSV cells are written with shortest round-trip float formatting and a
locale-independent decimal point, so equal inputs produce byte-identical
files and a re-read reproduces the values exactly.
"""

from __future__ import annotations

import json
import math
import os

_SVG_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf"]


def format_cell(value) -> str:
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(path, header, rows):
    """Write rows of numbers under a fixed header; empty data is an error."""
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write an empty CSV")
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match header")
        lines.append(",".join(format_cell(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read back a CSV written by write_csv: (header, list of rows)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    return header, rows


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_svg(path, header, rows, width=800, height=500, margin=60):
    """One polyline per y-column against the first column.

    Quick-look plot only: linear axes, per-column colors, min/max tick
    labels, no interactivity.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write an empty SVG")
    cols = list(zip(*rows))
    x = [float(v) for v in cols[0]]
    xmin, xmax = min(x), max(x)
    ys = []
    for c in cols[1:]:
        ys.append([float(v) for v in c])
    finite = [v for col in ys for v in col if math.isfinite(v)]
    if not finite:
        raise ValueError("no finite values to plot")
    ymin, ymax = min(finite), max(finite)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    def sx(v):
        return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin}" y="{height - margin + 20}" font-size="12">'
        f'{format_cell(xmin)}</text>',
        f'<text x="{width - margin}" y="{height - margin + 20}" '
        f'font-size="12" text-anchor="end">{format_cell(xmax)}</text>',
        f'<text x="{margin - 6}" y="{height - margin}" font-size="12" '
        f'text-anchor="end">{format_cell(ymin)}</text>',
        f'<text x="{margin - 6}" y="{margin}" font-size="12" '
        f'text-anchor="end">{format_cell(ymax)}</text>',
    ]
    for i, (label, col) in enumerate(zip(header[1:], ys)):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}"
                       for a, b in zip(x, col) if math.isfinite(b))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - margin + 4}" '
                     f'y="{margin + 16 * i}" font-size="12" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
