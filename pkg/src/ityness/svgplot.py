"""Tiny deterministic SVG writer for the report figures.

Byte-identical output for identical inputs: no timestamps, fixed float
formatting, no external rendering dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 52, 14, 26, 40


def _f(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class Panel:
    def __init__(self, title: str, width=300, height=240):
        self.title = title
        self.width = width
        self.height = height
        self.body: list[str] = []

    def plot_rect(self):
        return (
            MARGIN_L,
            MARGIN_T,
            self.width - MARGIN_L - MARGIN_R,
            self.height - MARGIN_T - MARGIN_B,
        )


def _axis(panel: Panel, x_labels: Optional[Sequence[str]] = None,
          y_min: float = 0.0, y_max: float = 1.0, y_ticks: int = 5,
          x_label: str = "", y_label: str = ""):
    x0, y0, w, h = panel.plot_rect()
    b = panel.body
    b.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444" stroke-width="1"/>')
    b.append(f'<text x="{x0 + w / 2}" y="16" text-anchor="middle" font-size="11" font-weight="bold">{_esc(panel.title)}</text>')
    for t in range(y_ticks + 1):
        val = y_min + (y_max - y_min) * t / y_ticks
        y = y0 + h - h * t / y_ticks
        b.append(f'<line x1="{x0 - 3}" y1="{_f(y)}" x2="{x0}" y2="{_f(y)}" stroke="#444"/>')
        b.append(f'<text x="{x0 - 6}" y="{_f(y + 3)}" text-anchor="end" font-size="8">{_f(val)}</text>')
    if x_labels:
        step = w / len(x_labels)
        for i, lab in enumerate(x_labels):
            cx = x0 + step * (i + 0.5)
            b.append(
                f'<text x="{_f(cx)}" y="{y0 + h + 11}" text-anchor="end" font-size="8" '
                f'transform="rotate(-45 {_f(cx)} {y0 + h + 11})">{_esc(lab)}</text>'
            )
    if x_label:
        b.append(f'<text x="{x0 + w / 2}" y="{panel.height - 5}" text-anchor="middle" font-size="9">{_esc(x_label)}</text>')
    if y_label:
        b.append(
            f'<text x="12" y="{y0 + h / 2}" text-anchor="middle" font-size="9" '
            f'transform="rotate(-90 12 {y0 + h / 2})">{_esc(y_label)}</text>'
        )


def bar_panel(title: str, labels: Sequence[str], values: Sequence[float],
              y_max: float = 1.0, color: str = "#4878a8",
              y_label: str = "") -> Panel:
    panel = Panel(title)
    _axis(panel, labels, 0.0, y_max, y_label=y_label)
    x0, y0, w, h = panel.plot_rect()
    step = w / len(labels)
    for i, v in enumerate(values):
        bh = h * min(v, y_max) / y_max
        panel.body.append(
            f'<rect x="{_f(x0 + step * i + step * 0.15)}" y="{_f(y0 + h - bh)}" '
            f'width="{_f(step * 0.7)}" height="{_f(bh)}" fill="{color}"/>'
        )
    return panel


def scatter_panel(title: str, groups, x_range, y_range,
                  x_label: str = "", y_label: str = "",
                  lines=None, hline: Optional[float] = None) -> Panel:
    """groups: list of (label, color, [(x, y), ...]); lines: (color, pts)."""
    panel = Panel(title, width=430, height=320)
    _axis(panel, None, y_range[0], y_range[1], x_label=x_label, y_label=y_label)
    x0, y0, w, h = panel.plot_rect()

    def sx(x):
        return x0 + w * (x - x_range[0]) / (x_range[1] - x_range[0])

    def sy(y):
        return y0 + h - h * (y - y_range[0]) / (y_range[1] - y_range[0])

    for t in range(5):
        val = x_range[0] + (x_range[1] - x_range[0]) * t / 4
        panel.body.append(
            f'<text x="{_f(sx(val))}" y="{y0 + h + 12}" text-anchor="middle" font-size="8">{_f(val)}</text>'
        )
    if hline is not None and y_range[0] <= hline <= y_range[1]:
        panel.body.append(
            f'<line x1="{x0}" y1="{_f(sy(hline))}" x2="{x0 + w}" y2="{_f(sy(hline))}" '
            f'stroke="#999" stroke-dasharray="4,3"/>'
        )
    for color, pts in (lines or []):
        path = " ".join(
            f"{'M' if i == 0 else 'L'}{_f(sx(x))},{_f(sy(y))}" for i, (x, y) in enumerate(pts)
        )
        panel.body.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.6"/>')
    legend_y = y0 + 10
    for label, color, pts in groups:
        for x, y in pts:
            panel.body.append(
                f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="2.4" fill="{color}" fill-opacity="0.75"/>'
            )
        panel.body.append(
            f'<circle cx="{x0 + w - 86}" cy="{_f(legend_y)}" r="3" fill="{color}"/>'
        )
        panel.body.append(
            f'<text x="{x0 + w - 78}" y="{_f(legend_y + 3)}" font-size="8">{_esc(label)}</text>'
        )
        legend_y += 12
    return panel


def write_figure(path, panels: Sequence[Panel], per_row: int = 3) -> None:
    rows = [panels[i : i + per_row] for i in range(0, len(panels), per_row)]
    width = max(sum(p.width for p in row) for row in rows)
    height = sum(max(p.height for p in row) for row in rows)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="Helvetica,Arial,sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    y_off = 0
    for row in rows:
        x_off = 0
        for p in row:
            out.append(f'<g transform="translate({x_off},{y_off})">')
            out.extend(p.body)
            out.append("</g>")
            x_off += p.width
        y_off += max(p.height for p in row)
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
