"""Deterministic SVG rendering of 2D meshes.

Layers (each an svg group, toggled via options): generator points, Delaunay
edges, the per-point circles, and the control-volume polygons. Radius circles
are the only <circle> elements; point markers are small rects so element
counts stay meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .mesh import ControlVolumeMesh

ALL_LAYERS = ("points", "delaunay", "circles", "cells")


@dataclass(frozen=True)
class SvgOptions:
    layers: tuple = ALL_LAYERS
    size: int = 800
    point_size: float = 0.006      # marker half-width, fraction of the view span


def _fmt(v: float) -> str:
    return format(v, ".6f")


def render_svg(mesh: ControlVolumeMesh, pts: np.ndarray | None = None,
               radii: np.ndarray | None = None, options: SvgOptions | None = None) -> str:
    """Render a 2D mesh to an SVG string; byte-identical for identical input."""
    if mesh.dim != 2:
        raise DimensionMismatch("SVG rendering is 2D only; export 3D meshes to VTK")
    opt = options or SvgOptions()
    pts = mesh.points if pts is None else np.asarray(pts, dtype=float)
    radii = mesh.radii if radii is None else radii

    dv = mesh.domain.verts
    lo = dv.min(axis=0)
    hi = dv.max(axis=0)
    span = float(max(hi - lo))
    pad = 0.02 * span
    x0, y0 = lo - pad
    w, h = (hi - lo) + 2 * pad
    flip = y0 + (y0 + h)  # y -> flip - y maps world up to svg up

    def fy(y: float) -> str:
        return _fmt(flip - y)

    sw = _fmt(0.0015 * span)
    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{opt.size}" height="{opt.size}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">'
    )
    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="white"/>')

    if "cells" in opt.layers:
        out.append(f'<g id="cells" fill="none" stroke="#1a6faf" stroke-width="{sw}">')
        for cell in mesh.volumes:
            if cell.empty:
                continue
            coords = " ".join(f"{_fmt(v[0])},{fy(v[1])}" for v in cell.verts)
            out.append(f'<polygon points="{coords}"/>')
        out.append("</g>")

    if "delaunay" in opt.layers and mesh.simplices is not None:
        t = mesh.simplices
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        e = np.unique(e, axis=0)
        out.append(f'<g id="delaunay" stroke="#bbbbbb" stroke-width="{sw}">')
        for u, v in e:
            a, b = pts[u], pts[v]
            out.append(
                f'<line x1="{_fmt(a[0])}" y1="{fy(a[1])}" x2="{_fmt(b[0])}" y2="{fy(b[1])}"/>'
            )
        out.append("</g>")

    if "circles" in opt.layers and radii is not None:
        out.append(f'<g id="circles" fill="none" stroke="#d88a2d" stroke-width="{sw}">')
        for p, r in zip(pts, radii):
            out.append(f'<circle cx="{_fmt(p[0])}" cy="{fy(p[1])}" r="{_fmt(float(r))}"/>')
        out.append("</g>")

    if "points" in opt.layers:
        s = opt.point_size * span
        out.append('<g id="points" fill="#c0392b">')
        for p in pts:
            out.append(
                f'<rect x="{_fmt(p[0] - s)}" y="{_fmt(flip - p[1] - s)}" '
                f'width="{_fmt(2 * s)}" height="{_fmt(2 * s)}"/>'
            )
        out.append("</g>")

    out.append("</svg>")
    return "\n".join(out) + "\n"
