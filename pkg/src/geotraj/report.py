"""Minimal SVG renderings of curves and heatmaps.

CSV files are the authoritative outputs; these plots are for a quick look
and are written with fixed number formatting so reruns are byte-identical.
"""
from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=78, right=150, top=40, bottom=56)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float, log: bool) -> str:
    if log:
        return f"1e{int(round(v))}"
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)[: 2 * n + 1]


class _Frame:
    """Maps data coordinates into the plot rectangle."""

    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def px(self, x):
        span = (self.x1 - self.x0) or 1.0
        return self.left + (np.asarray(x) - self.x0) / span * (self.right - self.left)

    def py(self, y):
        span = (self.y1 - self.y0) or 1.0
        return self.bottom - (np.asarray(y) - self.y0) / span * (self.bottom - self.top)


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str, logy: bool = False) -> list:
    out = [
        f'<rect x="{fr.left}" y="{fr.top}" width="{fr.right - fr.left}" height="{fr.bottom - fr.top}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{(fr.left + fr.right) / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{(fr.left + fr.right) / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" font-size="13">'
        f'{escape(xlabel)}</text>',
        f'<text x="18" y="{(fr.top + fr.bottom) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {(fr.top + fr.bottom) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _nice_ticks(fr.x0, fr.x1):
        x = _fmt(fr.px(t))
        out.append(f'<line x1="{x}" y1="{fr.bottom}" x2="{x}" y2="{fr.bottom + 5}" stroke="#333"/>')
        out.append(f'<text x="{x}" y="{fr.bottom + 19}" text-anchor="middle" font-size="11">'
                   f'{_tick_label(t, False)}</text>')
    yt = np.arange(np.ceil(fr.y0), np.floor(fr.y1) + 1) if logy else _nice_ticks(fr.y0, fr.y1)
    for t in yt:
        y = _fmt(fr.py(t))
        out.append(f'<line x1="{fr.left - 5}" y1="{y}" x2="{fr.left}" y2="{y}" stroke="#333"/>')
        out.append(f'<text x="{fr.left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                   f'font-size="11">{_tick_label(t, logy)}</text>')
    return out


def _document(body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>'] + body + ["</svg>", ""])


def line_plot_svg(path, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
                  logy: bool = False) -> None:
    """Overlay of curves; ``series`` maps a legend label to (x, y) arrays.

    With ``logy`` non-positive values are dropped from the curve.
    """
    xs, ys = [], []
    prepared = []
    for label, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(y) & np.isfinite(x)
        if logy:
            keep &= y > 0
            y = np.where(keep, np.log10(np.where(y > 0, y, 1.0)), np.nan)
        prepared.append((label, x[keep], y[keep]))
        xs.append(x[keep])
        ys.append(y[keep])
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    if allx.size == 0:
        allx = np.array([0.0, 1.0])
    if ally.size == 0:
        ally = np.array([0.0, 1.0])
    ylo, yhi = float(ally.min()), float(ally.max())
    if logy:
        ylo, yhi = np.floor(ylo), np.ceil(yhi)
    if yhi - ylo < 1e-15:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.0 if logy else 0.05 * (yhi - ylo)
    fr = _Frame((float(allx.min()), float(allx.max())), (ylo - pad, yhi + pad))
    body = _axes(fr, title, xlabel, ylabel, logy)
    for k, (label, x, y) in enumerate(prepared):
        color = PALETTE[k % len(PALETTE)]
        if x.size:
            pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(fr.px(x), fr.py(y)))
            body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = fr.top + 18 * k + 8
        body.append(f'<line x1="{fr.right + 12}" y1="{ly}" x2="{fr.right + 32}" y2="{ly}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{fr.right + 38}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    with open(path, "w") as fh:
        fh.write(_document(body))


def _color(u: float) -> str:
    # dark blue -> yellow ramp
    stops = np.array([[48, 18, 59], [40, 120, 180], [60, 190, 120], [250, 230, 40]], dtype=float)
    u = min(max(u, 0.0), 1.0) * (len(stops) - 1)
    i = min(int(u), len(stops) - 2)
    c = stops[i] + (u - i) * (stops[i + 1] - stops[i])
    return "#" + "".join(f"{int(round(v)):02x}" for v in c)


def heatmap_svg(path, x, y, z, title: str = "", xlabel: str = "", ylabel: str = "",
                zlabel: str = "", log: bool = False, vmin: Optional[float] = None,
                vmax: Optional[float] = None) -> None:
    """Heatmap of ``z[i, j]`` at (x[i], y[j]); NaN cells are grey."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    vals = z.copy()
    if log:
        vals = np.where(vals > 0, np.log10(np.where(vals > 0, vals, 1.0)), np.nan)
    finite = vals[np.isfinite(vals)]
    lo = float(finite.min()) if vmin is None and finite.size else (vmin if vmin is not None else 0.0)
    hi = float(finite.max()) if vmax is None and finite.size else (vmax if vmax is not None else 1.0)
    if hi - lo < 1e-15:
        hi = lo + 1.0

    def edges(v):
        if v.size == 1:
            return np.array([v[0] - 0.5, v[0] + 0.5])
        mid = 0.5 * (v[1:] + v[:-1])
        return np.concatenate([[v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]])

    ex, ey = edges(x), edges(y)
    fr = _Frame((float(ex[0]), float(ex[-1])), (float(ey[0]), float(ey[-1])))
    body = []
    for i in range(len(x)):
        for j in range(len(y)):
            v = vals[i, j]
            fill = "#bbbbbb" if not np.isfinite(v) else _color((v - lo) / (hi - lo))
            xa, xb = fr.px(ex[i]), fr.px(ex[i + 1])
            ya, yb = fr.py(ey[j + 1]), fr.py(ey[j])
            body.append(f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" width="{_fmt(xb - xa + 0.3)}" '
                        f'height="{_fmt(yb - ya + 0.3)}" fill="{fill}"/>')
    body += _axes(fr, title, xlabel, ylabel)
    # colour bar
    bx, top, bottom = fr.right + 20, fr.top, fr.bottom
    n = 40
    for k in range(n):
        ya = bottom - (k + 1) * (bottom - top) / n
        body.append(f'<rect x="{bx}" y="{_fmt(ya)}" width="18" height="{_fmt((bottom - top) / n + 0.3)}" '
                    f'fill="{_color((k + 0.5) / n)}"/>')
    for v, yy in ((hi, top), (lo, bottom)):
        body.append(f'<text x="{bx + 24}" y="{_fmt(yy)}" dominant-baseline="middle" font-size="11">'
                    f'{_tick_label(v, log)}</text>')
    body.append(f'<text x="{bx + 24}" y="{_fmt((top + bottom) / 2)}" font-size="11">{escape(zlabel)}</text>')
    with open(path, "w") as fh:
        fh.write(_document(body))
