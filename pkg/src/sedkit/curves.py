"""CSV and SVG curve emission.

Every CSV starts with a ``# config:`` comment carrying the full resolved
configuration of the run that produced it, then a header row whose names
carry their units, then data rows.  Cells are written with ``repr``-faithful
floats, so identical runs produce byte-identical files and every float reads
back exactly.  SVG plots are self-contained documents — fixed palette,
inline styling, no external references — so they render anywhere without a
plotting dependency.  All writers go through atomic write-then-rename.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Mapping, Sequence

from .dataset_io import atomic_write_text
from .errors import ValidationError

__all__ = [
    "format_config_comment",
    "format_csv",
    "write_csv",
    "line_plot_svg",
    "write_svg",
]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config_comment(config: Mapping[str, object]) -> str:
    """One ``# config:`` line with every resolved setting, in mapping order."""
    parts = []
    for key, value in config.items():
        cell = _format_cell(value)
        if any(ch.isspace() for ch in cell):
            cell = cell.replace(" ", "")
        parts.append(f"{key}={cell}")
    return "# config: " + " ".join(parts)


def format_csv(
    header: Sequence[str],
    rows: Sequence[Sequence[object]],
    config: Mapping[str, object],
) -> str:
    """Render comment + header + rows to CSV text with ``\\n`` line ends."""
    if not header:
        raise ValidationError("CSV needs a non-empty header")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValidationError(
                f"CSV row {i} has {len(row)} cells, header has {len(header)}"
            )
    buffer = io.StringIO()
    buffer.write(format_config_comment(config) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(cell) for cell in row])
    return buffer.getvalue()


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Sequence[Sequence[object]],
    config: Mapping[str, object],
) -> None:
    atomic_write_text(path, format_csv(header, rows, config))


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        pad = max(abs(lo) * 0.1, 0.5)
        lo, hi = lo - pad, hi + pad
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def line_plot_svg(
    title: str,
    x_label: str,
    y_label: str,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    width: int = 640,
    height: int = 420,
    mark_x: float | None = None,
) -> str:
    """Render named (x, y) series as a standalone SVG line plot.

    ``mark_x`` draws a dashed vertical rule — used to flag the selected
    threshold on sweep plots.
    """
    if not series:
        raise ValidationError("plot needs at least one series")
    for name, xs, ys in series:
        if len(xs) != len(ys):
            raise ValidationError(f"series {name!r}: x and y lengths differ")
        if not xs:
            raise ValidationError(f"series {name!r} is empty")
        for v in (*xs, *ys):
            if not math.isfinite(v):
                raise ValidationError(f"series {name!r} contains a non-finite value")

    all_x = [v for _, xs, _ in series for v in xs]
    all_y = [v for _, _, ys in series for v in ys]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi <= y_lo:
        pad = max(abs(y_lo) * 0.1, 0.5)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    y_pad = (y_hi - y_lo) * 0.06
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    margin_l, margin_r, margin_t, margin_b = 64, 16, 36, 48
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    def px(x: float) -> float:
        return margin_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return margin_t + (y_hi - y) / (y_hi - y_lo) * plot_h

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    out.append(
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
    )
    # axes frame
    out.append(
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444" stroke-width="1"/>'
    )
    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        out.append(
            f'<line x1="{x:.2f}" y1="{margin_t + plot_h}" x2="{x:.2f}" '
            f'y2="{margin_t + plot_h + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{x:.2f}" y="{margin_t + plot_h + 18}" text-anchor="middle">{_fmt(tick)}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        out.append(
            f'<line x1="{margin_l - 5}" y1="{y:.2f}" x2="{margin_l}" y2="{y:.2f}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{margin_l - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(tick)}</text>'
        )
        out.append(
            f'<line x1="{margin_l}" y1="{y:.2f}" x2="{margin_l + plot_w}" y2="{y:.2f}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
        )
    out.append(
        f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle">{x_label}</text>'
    )
    out.append(
        f'<text x="16" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})">{y_label}</text>'
    )
    if mark_x is not None:
        x = px(mark_x)
        out.append(
            f'<line x1="{x:.2f}" y1="{margin_t}" x2="{x:.2f}" y2="{margin_t + plot_h}" '
            f'stroke="#888" stroke-width="1" stroke-dasharray="4 3"/>'
        )
    for index, (name, xs, ys) in enumerate(series):
        color = _PALETTE[index % len(_PALETTE)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.4" fill="{color}"/>')
        legend_y = margin_t + 14 + 16 * index
        out.append(
            f'<line x1="{margin_l + plot_w - 120}" y1="{legend_y - 4}" '
            f'x2="{margin_l + plot_w - 100}" y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{margin_l + plot_w - 94}" y="{legend_y}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str, svg_text: str) -> None:
    atomic_write_text(path, svg_text)
