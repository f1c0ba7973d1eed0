"""Static SVG 1.1 figures: curve frames and bracket overlays."""

from __future__ import annotations

import numpy as np

from .geometry import unit_tangent

_HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
    'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
)


def _points(xy) -> str:
    return " ".join(f"{x:.4f},{y:.4f}" for x, y in xy)


def _closed(xy):
    return np.vstack([xy, xy[:1]])


def curve_frame(measure, title: str = "", size: int = 480, extent: float = 3.0) -> str:
    """Curve (black) with the density drawn as a radial offset curve (red)."""
    curve = measure.curve
    pos = curve.positions
    t = unit_tangent(curve)
    normal = np.column_stack([t[:, 1], -t[:, 0]])
    rho = measure.density
    peak = np.max(np.abs(rho))
    offset = pos + normal * (0.4 * rho / peak)[:, None] if peak > 0 else pos
    scale = size / (2.0 * extent)

    def to_px(p):
        return np.column_stack([(p[:, 0] + extent) * scale, (extent - p[:, 1]) * scale])

    parts = [_HEADER.format(w=size, h=size)]
    parts.append(f'<rect width="{size}" height="{size}" fill="white"/>\n')
    parts.append(f'<polyline fill="none" stroke="black" stroke-width="1.5" '
                 f'points="{_points(to_px(_closed(pos)))}"/>\n')
    parts.append(f'<polyline fill="none" stroke="#c0392b" stroke-width="1" '
                 f'points="{_points(to_px(_closed(offset)))}"/>\n')
    if title:
        parts.append(f'<text x="8" y="18" font-family="sans-serif" font-size="13">{title}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def line_overlay(theta, series: dict, title: str = "", width: int = 640, height: int = 360) -> str:
    """Plot several node functions against ``theta`` on shared axes."""
    theta = np.asarray(theta, dtype=float)
    values = [np.asarray(v, dtype=float) for v in series.values()]
    lo = min(v.min() for v in values)
    hi = max(v.max() for v in values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 30

    def y_px(y):
        return height - pad - (y - lo) / (hi - lo) * (height - 2 * pad)

    def to_px(y):
        x = pad + (theta / (2 * np.pi)) * (width - 2 * pad)
        return np.column_stack([x, y_px(y)])

    colours = ["#c0392b", "black", "#2e86c1", "#27ae60"]
    parts = [_HEADER.format(w=width, h=height)]
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    zero = y_px(0.0) if lo < 0 < hi else None
    if zero is not None:
        parts.append(f'<line x1="{pad}" y1="{zero:.4f}" x2="{width - pad}" y2="{zero:.4f}" '
                     'stroke="#999" stroke-dasharray="4,3"/>\n')
    for k, (name, v) in enumerate(series.items()):
        col = colours[k % len(colours)]
        parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" '
                     f'points="{_points(to_px(v))}"/>\n')
        parts.append(f'<text x="{width - pad - 150}" y="{20 + 16 * k}" font-family="sans-serif" '
                     f'font-size="12" fill="{col}">{name}</text>\n')
    if title:
        parts.append(f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{title}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)
