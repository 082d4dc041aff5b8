"""Small static SVG line charts, written without external renderers.

Presentation only; carries no acceptance weight.
"""

from __future__ import annotations

import math

_W, _H = 660, 430
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 620, 50, 380
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.4g}"


def line_chart_svg(path, title: str, series, xlabel: str = "t",
                   ylabel: str = "", ylog: bool = False) -> None:
    """Write a line chart; ``series`` is a list of (label, xs, ys) triples.

    With ``ylog`` the y axis is log10 and nonpositive values are dropped.
    """
    pts = []
    for label, xs, ys in series:
        keep = [(float(x), float(y)) for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y) and (not ylog or y > 0)]
        pts.append((label, keep))
    allx = [p[0] for _, k in pts for p in k]
    ally = [(math.log10(p[1]) if ylog else p[1]) for _, k in pts for p in k]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W // 2}" y="28" text-anchor="middle" '
           f'font-family="sans-serif" font-size="15">{title}</text>']
    if allx and ally:
        xlo, xhi = min(allx), max(allx)
        ylo, yhi = min(ally), max(ally)
        if xhi == xlo:
            xhi = xlo + 1.0
        if yhi == ylo:
            yhi = ylo + 1.0

        def px(x):
            return _LEFT + (_RIGHT - _LEFT) * (x - xlo) / (xhi - xlo)

        def py(y):
            return _BOTTOM - (_BOTTOM - _TOP) * (y - ylo) / (yhi - ylo)

        for tx in _ticks(xlo, xhi):
            out.append(f'<line x1="{px(tx):.1f}" y1="{_TOP}" x2="{px(tx):.1f}" '
                       f'y2="{_BOTTOM}" stroke="#eeeeee"/>')
            out.append(f'<text x="{px(tx):.1f}" y="{_BOTTOM + 18}" '
                       f'text-anchor="middle" font-family="sans-serif" '
                       f'font-size="11">{_fmt(tx)}</text>')
        for ty in _ticks(ylo, yhi):
            label = _fmt(10 ** ty) if ylog else _fmt(ty)
            out.append(f'<line x1="{_LEFT}" y1="{py(ty):.1f}" x2="{_RIGHT}" '
                       f'y2="{py(ty):.1f}" stroke="#eeeeee"/>')
            out.append(f'<text x="{_LEFT - 6}" y="{py(ty) + 4:.1f}" '
                       f'text-anchor="end" font-family="sans-serif" '
                       f'font-size="11">{label}</text>')
        for i, (label, keep) in enumerate(pts):
            if not keep:
                continue
            color = _COLORS[i % len(_COLORS)]
            coords = " ".join(
                f"{px(x):.2f},{py(math.log10(y) if ylog else y):.2f}"
                for x, y in keep)
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{_RIGHT - 4}" y="{_TOP + 16 + 16 * i}" '
                       f'text-anchor="end" font-family="sans-serif" '
                       f'font-size="12" fill="{color}">{label}</text>')
    out.append(f'<rect x="{_LEFT}" y="{_TOP}" width="{_RIGHT - _LEFT}" '
               f'height="{_BOTTOM - _TOP}" fill="none" stroke="black"/>')
    out.append(f'<text x="{(_LEFT + _RIGHT) // 2}" y="{_H - 8}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{xlabel}</text>')
    out.append(f'<text x="18" y="{(_TOP + _BOTTOM) // 2}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 18 {(_TOP + _BOTTOM) // 2})">{ylabel}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
