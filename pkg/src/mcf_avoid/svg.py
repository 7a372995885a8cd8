"""SVG snapshots of zero level sets."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from skimage import measure

from .distance import RegionSet
from .grid import Grid

REGION_IDS = ("x-set", "y-set", "m-set")
_COLOURS = {"x-set": "#1f77b4", "y-set": "#d62728", "m-set": "#2ca02c"}


def zero_polylines(region: RegionSet) -> list[np.ndarray]:
    """Marching-squares polylines of {u = 0} in world coordinates."""
    u = np.asarray(region.u)
    if not region.has_interface or len(region.points) and not (u <= 0).any():
        return []
    grid = region.grid
    lines = []
    for c in measure.find_contours(u, 0.0):
        xy = np.column_stack([grid.x[0] + c[:, 0] * grid.h, grid.y[0] + c[:, 1] * grid.h])
        lines.append(xy)
    return lines


def _path_data(lines, grid):
    flip = grid.ymin + grid.ymax
    parts = []
    for xy in lines:
        closed = len(xy) > 2 and np.allclose(xy[0], xy[-1])
        pts = xy[:-1] if closed else xy
        coords = " L ".join(f"{x:.6f} {flip - y:.6f}" for x, y in pts)
        parts.append(f"M {coords}" + (" Z" if closed else ""))
    return " ".join(parts)


def render_svg(regions, grid: Grid, path) -> Path:
    """Write one SVG with a path element per non-empty region.

    ``regions`` is a sequence aligned with ("x-set", "y-set", "m-set") or a
    mapping from those ids; ``None`` entries are skipped.
    """
    if not isinstance(regions, dict):
        regions = dict(zip(REGION_IDS, regions))
    w, h = grid.xmax - grid.xmin, grid.ymax - grid.ymin
    stroke = 1.5 * grid.h
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{grid.xmin:g} {grid.ymin:g} {w:g} {h:g}">',
    ]
    for rid in REGION_IDS:
        region = regions.get(rid)
        if region is None:
            continue
        lines = zero_polylines(region)
        if not lines:
            continue
        out.append(f'<path id="{rid}" fill="none" stroke="{_COLOURS[rid]}" '
                   f'stroke-width="{stroke:g}" d="{_path_data(lines, grid)}"/>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
