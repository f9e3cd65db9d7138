"""Minimal self-contained SVG line plots and heat maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from typing import Optional, Sequence

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    yerr: Optional[Sequence[float]] = None
    dashed: bool = False
    markers: bool = False


@dataclass
class _Frame:
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    parts: list = field(default_factory=list)

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        return MARGIN["left"] + (x - lo) / (hi - lo) * (WIDTH - MARGIN["left"] - MARGIN["right"])

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return HEIGHT - MARGIN["bottom"] - (y - lo) / (hi - lo) * (HEIGHT - MARGIN["top"] - MARGIN["bottom"])


def _n(v: float) -> str:
    return f"{v:.2f}"


def _limits(values: np.ndarray) -> tuple[float, float]:
    v = values[np.isfinite(values)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = abs(hi) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> None:
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    fr.parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#000"/>')
    for t in _ticks(*fr.xlim):
        X = fr.px(t)
        fr.parts.append(f'<line x1="{_n(X)}" y1="{y0}" x2="{_n(X)}" y2="{y0 + 5}" stroke="#000"/>')
        fr.parts.append(f'<text x="{_n(X)}" y="{y0 + 18}" text-anchor="middle" font-size="11">{t:.4g}</text>')
    for t in _ticks(*fr.ylim):
        Y = fr.py(t)
        fr.parts.append(f'<line x1="{x0 - 5}" y1="{_n(Y)}" x2="{x0}" y2="{_n(Y)}" stroke="#000"/>')
        fr.parts.append(f'<text x="{x0 - 8}" y="{_n(Y + 4)}" text-anchor="end" font-size="11">{t:.4g}</text>')
    fr.parts.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    fr.parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    fr.parts.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )


def _document(parts: list) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">'
    )
    return "\n".join([head, '<rect width="100%" height="100%" fill="#fff"/>', *parts, "</svg>"]) + "\n"


def line_plot(series: Sequence[Series], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    xs = np.concatenate([np.asarray(s.x, float) for s in series]) if series else np.zeros(1)
    ys = [np.asarray(s.y, float) for s in series]
    for s in series:
        if s.yerr is not None:
            y, e = np.asarray(s.y, float), np.asarray(s.yerr, float)
            ys += [y - e, y + e]
    fr = _Frame(_limits(xs), _limits(np.concatenate(ys) if ys else np.zeros(1)))
    _axes(fr, title, xlabel, ylabel)
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = [(fr.px(a), fr.py(b)) for a, b in zip(s.x, s.y) if math.isfinite(a) and math.isfinite(b)]
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        if not s.markers and len(pts) > 1:
            path = " ".join(f"{_n(a)},{_n(b)}" for a, b in pts)
            fr.parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        if s.markers or len(pts) == 1:
            for a, b in pts:
                fr.parts.append(f'<circle cx="{_n(a)}" cy="{_n(b)}" r="3" fill="{color}"/>')
        if s.yerr is not None:
            for a, b, e in zip(s.x, s.y, s.yerr):
                if all(math.isfinite(v) for v in (a, b, e)):
                    X = _n(fr.px(a))
                    fr.parts.append(
                        f'<line x1="{X}" y1="{_n(fr.py(b - e))}" x2="{X}" y2="{_n(fr.py(b + e))}" stroke="{color}"/>'
                    )
        if s.label:
            ly = MARGIN["top"] + 16 + 16 * i
            lx = WIDTH - MARGIN["right"] - 150
            fr.parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}"{dash}/>')
            fr.parts.append(f'<text x="{lx + 26}" y="{ly}" font-size="11">{escape(s.label)}</text>')
    return _document(fr.parts)


def _color(v: float) -> str:
    """Dark blue to yellow ramp for v in [0, 1]."""
    v = min(max(v, 0.0), 1.0)
    r = int(round(30 + 225 * v))
    g = int(round(30 + 200 * v))
    b = int(round(120 - 90 * v))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(
    xs: Sequence[float],
    ys: Sequence[float],
    z: np.ndarray,
    overlay: Sequence[tuple[float, float]] = (),
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> str:
    """``z[i, j]`` is the value at ``(xs[i], ys[j])``; overlay points drawn as dots."""
    xs, ys, z = np.asarray(xs, float), np.asarray(ys, float), np.asarray(z, float)
    fr = _Frame(_limits(xs), _limits(ys))
    zmax = float(np.nanmax(z)) if z.size and np.isfinite(z).any() and np.nanmax(z) > 0 else 1.0
    w = (fr.px(fr.xlim[1]) - fr.px(fr.xlim[0])) / max(len(xs), 1)
    hgt = (fr.py(fr.ylim[0]) - fr.py(fr.ylim[1])) / max(len(ys), 1)
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            fr.parts.append(
                f'<rect x="{_n(fr.px(xv) - w / 2)}" y="{_n(fr.py(yv) - hgt / 2)}" width="{_n(w + 0.5)}" '
                f'height="{_n(hgt + 0.5)}" fill="{_color(z[i, j] / zmax)}"/>'
            )
    for a, b in overlay:
        fr.parts.append(f'<circle cx="{_n(fr.px(a))}" cy="{_n(fr.py(b))}" r="2" fill="#4da3ff"/>')
    _axes(fr, title, xlabel, ylabel)
    return _document(fr.parts)
