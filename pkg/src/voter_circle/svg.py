"""Minimal SVG emitters: line charts and district maps.

Output is a pure function of the inputs, so files are byte-identical across
runs with identical data.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WINNER_FILL = {"pos": "#6baed6", "neg": "#fc9272", "tie": "#d9d9d9"}


def _num(x: float) -> str:
    return f"{x:.6g}"


def _header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / count))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= count:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def line_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               log_x: bool = False, width: int = 640, height: int = 420) -> str:
    """Line chart of named ``(xs, ys)`` series.

    A series whose name starts with ``"ref:"`` is drawn dashed, without markers,
    and labeled without the prefix.
    """
    if not series:
        raise ValueError("no series to plot")
    left, right, top, bottom = 70, 160, 40, 50
    pw, ph = width - left - right, height - top - bottom
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    xs = [tx(float(x)) for xv, _ in series.values() for x in xv]
    ys = [float(y) for _, yv in series.values() for y in yv]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.05 * max(abs(y0), 1.0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (tx(float(x)) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - float(y)) / (y1 - y0) * ph

    out = _header(width, height)
    out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(y0, y1):
        y = py(t)
        out.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{_num(t)}</text>')
    xticks = range(math.ceil(x0), math.floor(x1) + 1) if log_x else _ticks(x0, x1)
    for t in xticks:
        x = left + (t - x0) / (x1 - x0) * pw
        label = _num(10**t) if log_x else _num(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, (xv, yv)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        ref = name.startswith("ref:")
        label = name[4:] if ref else name
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xv, yv))
        dash = ' stroke-dasharray="6 4"' if ref else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        if not ref:
            for x, y in zip(xv, yv):
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def district_map(regions: list, winners: list, boundary, segments=(), points=None,
                 title: str = "", size: int = 560) -> str:
    """Filled district polygons colored by winner, with split-line segments on top.

    ``regions`` holds one vertex array per district (or None), ``winners`` the
    matching ``"pos"``/``"neg"``/``"tie"`` labels and ``boundary`` the state ring.
    """
    if len(regions) != len(winners):
        raise ValueError("regions and winners differ in length")
    boundary = np.asarray(boundary, dtype=float)
    lo, hi = boundary.min(axis=0), boundary.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    margin, top = 20, 36
    scale = (size - 2 * margin) / span
    height = int(top + margin + scale * (hi[1] - lo[1]))

    def xy(p):
        # flip y so north is up
        return margin + (p[0] - lo[0]) * scale, top + (hi[1] - p[1]) * scale

    def ring(vertices):
        return " ".join("{:.2f},{:.2f}".format(*xy(p)) for p in vertices)

    out = _header(size, height)
    out.append(f'<text x="{size / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for i, (region, winner) in enumerate(zip(regions, winners)):
        if region is None or len(region) < 3:
            continue
        fill = WINNER_FILL.get(winner, WINNER_FILL["tie"])
        out.append(f'<polygon points="{ring(region)}" fill="{fill}" stroke="white" stroke-width="0.5">'
                   f'<title>district {i}: {escape(str(winner))}</title></polygon>')
    if points is not None:
        for p in np.asarray(points, dtype=float):
            x, y = xy(p)
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="0.8" fill="#444" fill-opacity="0.4"/>')
    for a, b in segments:
        (xa, ya), (xb, yb) = xy(a), xy(b)
        out.append(f'<line x1="{xa:.2f}" y1="{ya:.2f}" x2="{xb:.2f}" y2="{yb:.2f}" '
                   'stroke="black" stroke-width="1.5"/>')
    out.append(f'<polygon points="{ring(boundary)}" fill="none" stroke="black" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
