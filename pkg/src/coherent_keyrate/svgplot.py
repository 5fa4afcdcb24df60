"""Minimal deterministic SVG line charts for sweep results."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .errors import EmptyData

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 170, 50, 70
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice(x: float, round_: bool) -> float:
    """Nearest 1, 2, 5 or 10 times a power of ten."""
    exp = math.floor(math.log10(x))
    f = x / 10**exp
    if round_:
        nf = 1 if f < 1.5 else 2 if f < 3 else 5 if f < 7 else 10
    else:
        nf = 1 if f <= 1 else 2 if f <= 2 else 5 if f <= 5 else 10
    return nf * 10**exp


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Tick positions covering ``[lo, hi]`` with a 1-2-5 step."""
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    step = _nice(_nice(hi - lo, False) / (target - 1), True)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    count = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(count + 1)]


def _label(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def render_svg(columns, rows, title: str = "", x_label: str | None = None, y_label: str = "key rate") -> str:
    """Line chart of every column against the first one.

    Raises:
        EmptyData: fewer than two rows or no y column.
    """
    rows = [tuple(float(v) for v in r) for r in rows]
    if len(rows) < 2 or len(columns) < 2:
        raise EmptyData(f"need at least 2 rows and 2 columns to plot, got {len(rows)} rows")
    xs = [r[0] for r in rows]
    ys = [v for r in rows for v in r[1:] if math.isfinite(v)]
    if not ys:
        raise EmptyData("no finite values to plot")
    xt = nice_ticks(min(xs), max(xs))
    yt = nice_ticks(min(ys), max(ys))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x):
        return MARGIN_LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN_TOP + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    for t in xt:
        out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN_TOP}" x2="{px(t):.2f}" y2="{MARGIN_TOP + ph}" stroke="#e0e0e0"/>')
        out.append(
            f'<text x="{px(t):.2f}" y="{MARGIN_TOP + ph + 20}" text-anchor="middle">{_label(t)}</text>'
        )
    for t in yt:
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{py(t):.2f}" x2="{MARGIN_LEFT + pw}" y2="{py(t):.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{_label(t)}</text>')
    out.append(f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')

    for k, name in enumerate(columns[1:], 1):
        color = COLORS[(k - 1) % len(COLORS)]
        pts = " ".join(f"{px(r[0]):.2f},{py(r[k]):.2f}" for r in rows if math.isfinite(r[k]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = MARGIN_TOP + 10 + 22 * (k - 1)
        lx = WIDTH - MARGIN_RIGHT + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(str(name))}</text>')

    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>')
    out.append(
        f'<text x="{MARGIN_LEFT + pw / 2:.0f}" y="{HEIGHT - 20}" text-anchor="middle">'
        f"{escape(x_label if x_label is not None else str(columns[0]))}</text>"
    )
    cy = MARGIN_TOP + ph / 2
    out.append(
        f'<text x="20" y="{cy:.0f}" text-anchor="middle" transform="rotate(-90 20 {cy:.0f})">{escape(y_label)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
