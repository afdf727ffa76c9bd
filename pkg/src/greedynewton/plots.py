"""Minimal self-contained SVG line charts (no external assets)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
LOG_FLOOR = 1e-16
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 50


@dataclass
class Series:
    label: str
    x: list[float]
    y: list[float]
    # indices of points drawn with a distinct marker (e.g. hybrid gradient steps)
    marked: list[int] = field(default_factory=list)


def _ticks_linear(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(step))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        ticks.append(t)
        t += step
    return ticks


def line_chart(series: list[Series], title: str, xlabel: str, ylabel: str, logy: bool = True) -> str:
    """Render series as polylines; with ``logy`` values are clamped to 1e-16."""

    def ty(v):
        return math.log10(max(v, LOG_FLOOR)) if logy else v

    xs = [v for s in series for v in s.x]
    ys = [ty(v) for s in series for v in s.y if math.isfinite(v)]
    xlo, xhi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    ylo, yhi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if logy:
        ylo, yhi = math.floor(ylo), math.ceil(yhi)
    if xhi <= xlo:
        xhi = xlo + 1.0
    if yhi <= ylo:
        yhi = ylo + 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return TOP + (1.0 - (v - ylo) / (yhi - ylo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks_linear(xlo, xhi):
        out.append(f'<line x1="{px(t):.1f}" y1="{TOP + ph}" x2="{px(t):.1f}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px(t):.1f}" y="{TOP + ph + 17}" text-anchor="middle">{t:g}</text>')
    if logy:
        span = int(yhi - ylo)
        stride = max(1, span // 8)
        yt = [float(e) for e in range(int(ylo), int(yhi) + 1, stride)]
        labels = [f"1e{int(e)}" for e in yt]
    else:
        yt = _ticks_linear(ylo, yhi)
        labels = [f"{t:g}" for t in yt]
    for t, lab in zip(yt, labels):
        out.append(f'<line x1="{LEFT - 4}" y1="{py(t):.1f}" x2="{LEFT}" y2="{py(t):.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 7}" y="{py(t) + 4:.1f}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{px(a):.2f},{py(ty(b)):.2f}" for a, b in zip(s.x, s.y) if math.isfinite(b)
        )
        out.append(
            f'<polyline data-label="{escape(s.label)}" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="1.8"/>'
        )
        for j in s.marked:
            if j < len(s.x) and math.isfinite(s.y[j]):
                out.append(
                    f'<circle class="marker" cx="{px(s.x[j]):.2f}" cy="{py(ty(s.y[j])):.2f}" r="4" '
                    f'fill="none" stroke="{color}"/>'
                )
        ly = TOP + 14 + 18 * i
        lx = WIDTH - RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 28}" y="{ly + 4}">{escape(s.label)}</text>')
    if any(s.marked for s in series):
        ly = TOP + 14 + 18 * len(series)
        lx = WIDTH - RIGHT + 12
        out.append(f'<circle cx="{lx + 11}" cy="{ly}" r="4" fill="none" stroke="black"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">gradient step</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
