"""Dependency-free SVG line plot of BER curves on a log axis."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .montecarlo import BerCurve

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
_MARKERS = ("circle", "square", "diamond", "triangle")


def curves_to_svg(curves: list[BerCurve], title: str = "", width: int = 640, height: int = 480) -> str:
    left, right, top, bottom = 70, 150, 40, 55
    pw, ph = width - left - right, height - top - bottom
    snrs = [p.snr_db for c in curves for p in c.points]
    x0, x1 = min(snrs), max(snrs)
    if x1 == x0:
        x1 = x0 + 1.0
    positive = [p.ber for c in curves for p in c.points if p.bit_errors > 0]
    lo = math.floor(math.log10(min(positive))) if positive else -6
    hi = 0 if not positive else min(0, math.ceil(math.log10(max(positive))))
    if hi <= lo:
        hi = lo + 1

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(ber):
        return top + (hi - math.log10(ber)) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="white" stroke="black"/>',
    ]
    for e in range(lo, hi + 1):
        y = sy(10.0**e)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    for v in sorted(set(snrs)):
        x = sx(v)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#eee"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 16}" text-anchor="middle">{v:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">SNR (dB)</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2})">BER</text>'
    )
    if title:
        out.append(f'<text x="{left + pw / 2}" y="22" text-anchor="middle">{escape(title)}</text>')
    for i, c in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = [(sx(p.snr_db), sy(p.ber)) for p in c.points if p.bit_errors > 0]
        if len(pts) > 1:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{escape(c.detector.upper())}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
