"""Static SVG views of an embedding and its fitted helix.

Top view (e1, e2): chroma-colored bins joined by a grey line in pitch
order, the centroid hull as a black polygon with square vertices, the
fitted circle, the initial center as a red diamond and the final center as
a green square. Side view (e1, e3): the same bins with the fitted helix
points overlaid as a black line.
"""
from __future__ import annotations

import os
from xml.sax.saxutils import escape

import numpy as np

from .helix import chroma_of
from .report import atomic_write, safe_name

SIZE = 600
MARGIN = 40


class _Frame:
    """Affine map from data coordinates to SVG pixels (y axis up)."""

    def __init__(self, xs, ys, equal_aspect=True, size=SIZE, margin=MARGIN):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        self.x0, self.y0 = xs.min(), ys.min()
        span_x = max(xs.max() - self.x0, 1e-12)
        span_y = max(ys.max() - self.y0, 1e-12)
        inner = size - 2 * margin
        if equal_aspect:
            self.sx = self.sy = inner / max(span_x, span_y)
        else:
            self.sx, self.sy = inner / span_x, inner / span_y
        self.size, self.margin = size, margin

    def __call__(self, x, y):
        return (
            self.margin + (x - self.x0) * self.sx,
            self.size - self.margin - (y - self.y0) * self.sy,
        )


def _f(v):
    return f"{v:.3f}"


def _header(title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>{escape(str(title))}</title>",
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]


def _hue(chroma, q):
    return f"hsl({360.0 * (chroma - 1) / q:.1f},80%,45%)"


def _polyline(points, cls, stroke, width=1.0):
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
    return f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"/>'


def top_view_svg(emb, centroids, hull, circle, title="top view"):
    xy = emb.coords[:, :2]
    c, r = np.asarray(circle.center), circle.radius
    c0 = np.asarray(circle.initial_center)
    xs = np.concatenate([xy[:, 0], hull.vertices[:, 0], [c[0] - r, c[0] + r, c0[0]]])
    ys = np.concatenate([xy[:, 1], hull.vertices[:, 1], [c[1] - r, c[1] + r, c0[1]]])
    fr = _Frame(xs, ys)
    out = _header(title)
    cx, cy = fr(*c)
    out.append(
        f'<circle class="fit" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r * fr.sx)}" '
        'fill="none" stroke="#999999" stroke-dasharray="4 3"/>'
    )
    out.append(_polyline([fr(x, y) for x, y in xy], "pitch", "#aaaaaa"))
    hv = [fr(x, y) for x, y in hull.vertices]
    out.append(
        '<polygon class="hull" points="'
        + " ".join(f"{_f(x)},{_f(y)}" for x, y in hv)
        + '" fill="none" stroke="black" stroke-width="1.5"/>'
    )
    for x, y in hv:
        out.append(f'<rect class="hull-vertex" x="{_f(x - 4)}" y="{_f(y - 4)}" width="8" height="8" fill="black"/>')
    q = emb.bins_per_octave
    for b, ch, (x, y) in zip(emb.bin_index, chroma_of(emb.bin_index, q), xy):
        px, py = fr(x, y)
        out.append(
            f'<circle class="bin" data-bin="{int(b)}" cx="{_f(px)}" cy="{_f(py)}" r="4" fill="{_hue(ch, q)}"/>'
        )
    ix, iy = fr(*c0)
    out.append(
        f'<polygon class="initial-center" points="{_f(ix)},{_f(iy - 7)} {_f(ix + 7)},{_f(iy)} '
        f'{_f(ix)},{_f(iy + 7)} {_f(ix - 7)},{_f(iy)}" fill="red"/>'
    )
    out.append(f'<rect class="final-center" x="{_f(cx - 5)}" y="{_f(cy - 5)}" width="10" height="10" fill="green"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def side_view_svg(emb, projected, title="side view"):
    pts = emb.coords[:, [0, 2]]
    proj = np.asarray(projected)[:, [0, 2]]
    fr = _Frame(np.concatenate([pts[:, 0], proj[:, 0]]), np.concatenate([pts[:, 1], proj[:, 1]]), equal_aspect=False)
    out = _header(title)
    out.append(_polyline([fr(x, y) for x, y in proj], "helix", "black", 1.5))
    q = emb.bins_per_octave
    for b, ch, (x, y) in zip(emb.bin_index, chroma_of(emb.bin_index, q), pts):
        px, py = fr(x, y)
        out.append(
            f'<circle class="bin" data-bin="{int(b)}" cx="{_f(px)}" cy="{_f(py)}" r="4" fill="{_hue(ch, q)}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(report, directory):
    """Write ``<group>_top.svg`` and ``<group>_side.svg`` for every scored group."""
    written = []
    for name, art in report.artifacts.items():
        fit = art.fit
        stem = os.path.join(directory, safe_name(name))
        atomic_write(stem + "_top.svg", top_view_svg(art.embedding, fit.centroids, fit.hull, fit.circle, name))
        atomic_write(stem + "_side.svg", side_view_svg(art.embedding, fit.projected, name))
        written += [stem + "_top.svg", stem + "_side.svg"]
    return written
