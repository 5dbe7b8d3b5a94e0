"""Minimal SVG line plots: polylines, axes, ticks, legend.  No dependencies."""

from __future__ import annotations

import math

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    decades = [10.0 ** k for k in range(math.floor(math.log10(lo)),
                                        math.ceil(math.log10(hi)) + 1)
               if lo <= 10.0 ** k <= hi]
    if len(decades) >= 2:
        return decades
    return [10.0 ** x for x in
            (lo_l + f * (hi_l - lo_l)
             for lo_l, hi_l in [(math.log10(lo), math.log10(hi))]
             for f in (0.0, 1 / 3, 2 / 3, 1.0))]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def render_line_plot(series, *, title: str = "", xlabel: str = "", ylabel: str = "",
                     logx: bool = False, logy: bool = False,
                     width: int = 720, height: int = 480) -> str:
    """Render [(xs, ys, label), ...] as a standalone SVG string."""
    ml, mr, mt, mb = 72, 24, 40, 52
    pw, ph = width - ml - mr, height - mt - mb

    clean = []
    for xs, ys, label in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if not (math.isnan(x) or math.isnan(y))
               and not (logx and x <= 0) and not (logy and y <= 0)]
        if pts:
            clean.append((pts, label))
    if not clean:
        raise ValueError("nothing to plot")

    all_x = [p[0] for pts, _ in clean for p in pts]
    all_y = [p[1] for pts, _ in clean for p in pts]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x0, x1 = (0.5 * x0, 2.0 * x1) if logx else (x0 - 0.5, x1 + 0.5)
    if y1 == y0:
        y0, y1 = (0.5 * y0, 2.0 * y1) if logy else (y0 - 0.5, y1 + 0.5)
    if not logy:
        pad = 0.05 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad

    def tx(x: float) -> float:
        a, b = (math.log10(x0), math.log10(x1)) if logx else (x0, x1)
        v = math.log10(x) if logx else x
        return ml + (v - a) / (b - a) * pw

    def ty(y: float) -> float:
        a, b = (math.log10(y0), math.log10(y1)) if logy else (y0, y1)
        v = math.log10(y) if logy else y
        return mt + ph - (v - a) / (b - a) * ph

    xticks = _log_ticks(x0, x1) if logx else _nice_ticks(x0, x1)
    yticks = _log_ticks(y0, y1) if logy else _nice_ticks(y0, y1)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
                   f'font-size="15">{title}</text>')
    for t in xticks:
        px = tx(t)
        out.append(f'<line x1="{px:.2f}" y1="{mt}" x2="{px:.2f}" y2="{mt + ph}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in yticks:
        py = ty(t)
        out.append(f'<line x1="{ml}" y1="{py:.2f}" x2="{ml + pw}" y2="{py:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{ml - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
               'stroke="black"/>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" '
                   f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {mt + ph / 2:.1f})">{ylabel}</text>')

    for k, (pts, label) in enumerate(clean):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{tx(x):.2f},{ty(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        if label:
            ly = mt + 16 + 16 * k
            out.append(f'<line x1="{ml + pw - 130}" y1="{ly - 4}" x2="{ml + pw - 104}" '
                       f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{ml + pw - 98}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_plot(path, series, **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(render_line_plot(series, **kwargs))
