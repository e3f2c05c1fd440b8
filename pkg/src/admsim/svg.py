"""Minimal standalone SVG line plots.

Output is a pure function of the input data, so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2")


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    dashed: bool = False
    markers: bool = False
    kind: str = "line"  # "line" or "stems" (vertical ticks from 0)


@dataclass
class Panel:
    series: list[Series] = field(default_factory=list)
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.4g}"


def _finite_range(values: np.ndarray) -> tuple[float, float]:
    v = values[np.isfinite(values)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _panel_svg(panel: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    out = []
    left, right, top, bottom = 70.0, 150.0, 24.0, 40.0
    pw, ph = w - left - right, h - top - bottom
    px, py = x0 + left, y0 + top

    xs_all = [np.asarray(s.x, dtype=float) for s in panel.series]
    ys_all = [np.asarray(s.y, dtype=float) for s in panel.series]
    if panel.logx:
        xs_all = [np.log10(np.where(x > 0, x, np.nan)) for x in xs_all]
    cat = lambda arrs: np.concatenate(arrs) if arrs else np.zeros(0)
    xlo, xhi = _finite_range(cat(xs_all))
    ylo, yhi = _finite_range(cat(ys_all + [np.zeros(1)] if any(s.kind == "stems" for s in panel.series) else ys_all))

    def sx(v):
        return px + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return py + ph - (v - ylo) / (yhi - ylo) * ph

    out.append(f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(pw)}" height="{_fmt(ph)}" fill="none" stroke="#333"/>')
    if panel.title:
        out.append(f'<text x="{_fmt(px + pw / 2)}" y="{_fmt(py - 8)}" text-anchor="middle" font-size="13">{escape(panel.title)}</text>')
    for v, label in ((xlo, xlo), (xhi, xhi)):
        shown = 10**label if panel.logx else label
        out.append(
            f'<text x="{_fmt(sx(v))}" y="{_fmt(py + ph + 14)}" text-anchor="middle" font-size="10">{_tick(shown)}</text>'
        )
    for v in (ylo, yhi):
        out.append(f'<text x="{_fmt(px - 4)}" y="{_fmt(sy(v) + 3)}" text-anchor="end" font-size="10">{_tick(v)}</text>')
    if panel.xlabel:
        out.append(f'<text x="{_fmt(px + pw / 2)}" y="{_fmt(py + ph + 30)}" text-anchor="middle" font-size="11">{escape(panel.xlabel)}</text>')
    if panel.ylabel:
        cx, cy = px - 50, py + ph / 2
        out.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" font-size="11" transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(panel.ylabel)}</text>'
        )

    for i, (s, xs, ys) in enumerate(zip(panel.series, xs_all, ys_all)):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(xs) & np.isfinite(ys)
        xs, ys = xs[ok], ys[ok]
        if s.kind == "stems":
            base = sy(0.0)
            segs = " ".join(f"M{_fmt(sx(a))},{_fmt(base)}V{_fmt(sy(b))}" for a, b in zip(xs.tolist(), ys.tolist()))
            out.append(f'<path d="{segs}" stroke="{color}" stroke-width="1" fill="none"/>')
        else:
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xs.tolist(), ys.tolist()))
            dash = ' stroke-dasharray="6,3"' if s.dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>')
            if s.markers:
                for a, b in zip(xs.tolist(), ys.tolist()):
                    out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="2" fill="{color}"/>')
        ly = py + 12 + 14 * i
        out.append(f'<line x1="{_fmt(px + pw + 10)}" y1="{_fmt(ly - 4)}" x2="{_fmt(px + pw + 28)}" y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_fmt(px + pw + 32)}" y="{_fmt(ly)}" font-size="10">{escape(s.label)}</text>')
    return out


def render(panels: Sequence[Panel], width: float = 820.0, panel_height: float = 260.0, title: Optional[str] = None) -> str:
    head = 24.0 if title else 0.0
    height = head + panel_height * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g font-family="sans-serif">',
    ]
    if title:
        parts.append(f'<text x="{_fmt(width / 2)}" y="16" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for i, p in enumerate(panels):
        parts.extend(_panel_svg(p, 0.0, head + i * panel_height, width, panel_height))
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, panels: Sequence[Panel], **kw) -> Path:
    path = Path(path)
    path.write_text(render(panels, **kw))
    return path


def decimate(x: np.ndarray, y: np.ndarray, max_points: int = 4000) -> tuple[np.ndarray, np.ndarray]:
    """Min/max decimation that keeps peaks visible in long traces."""
    n = len(x)
    if n <= max_points:
        return x, y
    bins = max_points // 2
    edges = np.linspace(0, n, bins + 1).astype(int)
    xi, yi = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = y[a:b]
        i_lo, i_hi = a + int(np.argmin(seg)), a + int(np.argmax(seg))
        for j in sorted((i_lo, i_hi)):
            xi.append(x[j])
            yi.append(y[j])
    return np.asarray(xi), np.asarray(yi)
