"""Minimal deterministic SVG line plots (no plotting library)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PALETTE = ("#1f3a93", "#c0392b", "#27ae60", "#7f8c8d", "#8e44ad")


@dataclass(frozen=True)
class Curve:
    label: str
    x: np.ndarray
    y: np.ndarray
    dash: str = ""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(target, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + 0.5 * step, step) if lo - 1e-9 <= v <= hi + 1e-9]


def line_plot(curves: Sequence[Curve], xlabel: str, ylabel: str, title: str = "",
              y_floor: float | None = None, width: int = 720, height: int = 480) -> str:
    """Render ``curves`` as polylines on shared linear axes.

    Non-finite points and points below ``y_floor`` break the polyline.
    """
    ml, mr, mt, mb = 70, 150, 40, 55
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([c.x for c in curves])
    ys = np.concatenate([c.y[np.isfinite(c.y)] for c in curves])
    if y_floor is not None:
        ys = ys[ys >= y_floor]
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.03 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{_fmt(X)}" y1="{mt + ph}" x2="{_fmt(X)}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        out.append(f'<line x1="{ml - 5}" y1="{_fmt(Y)}" x2="{ml}" y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{mt + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {mt + ph / 2:.2f})">{ylabel}</text>')
    out.append(f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>')

    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(c.y) & ((c.y >= y_floor) if y_floor is not None else True)
        runs, current = [], []
        for xv, yv, good in zip(c.x, c.y, ok):
            if good:
                current.append(f"{_fmt(px(xv))},{_fmt(py(yv))}")
            elif current:
                runs.append(current)
                current = []
        if current:
            runs.append(current)
        dash = f' stroke-dasharray="{c.dash}"' if c.dash else ""
        for run in runs:
            out.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"{dash} points="{" ".join(run)}"/>')
        ly = mt + 16 + 18 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 35}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{ml + pw + 40}" y="{ly + 4}">{c.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
