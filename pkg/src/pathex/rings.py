"""Polygon ring rasterization and mask outline tracing.

Rasterization fills a pixel iff its center (x+0.5, y+0.5) lies inside the
ring set by the even-odd rule. Crossings are counted strictly to the right
of the center and edges span half-open [y_low, y_high) intervals, which
resolves centers that fall exactly on an edge by the usual top-left rule.

Outline tracing is the inverse: it walks the cracks between set and unset
pixels and returns integer-coordinate rings that rasterize back to exactly
the input mask (outer rings have positive signed area, holes negative).
"""

from __future__ import annotations

import numpy as np

Ring = list[tuple[float, float]]


def signed_area(ring: Ring) -> float:
    """Shoelace area; positive for outer rings in y-down coordinates."""
    total = 0.0
    n = len(ring)
    for i in range(n - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        total += x1 * y2 - x2 * y1
    return 0.5 * total


def rasterize_rings(rings: list[Ring], width: int, height: int) -> np.ndarray:
    """Fill rings into a (height, width) boolean grid, even-odd rule.

    Vertex coordinates are clamped to the grid before filling. All rings
    participate in one parity count, so holes need no special casing.
    """
    edges = []
    for ring in rings:
        pts = list(ring)
        if pts and pts[0] != pts[-1]:
            pts.append(pts[0])
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            x1 = min(max(x1, 0.0), float(width))
            x2 = min(max(x2, 0.0), float(width))
            y1 = min(max(y1, 0.0), float(height))
            y2 = min(max(y2, 0.0), float(height))
            if y1 != y2:
                edges.append((x1, y1, x2, y2))
    mask = np.zeros((height, width), dtype=bool)
    if not edges:
        return mask
    ex1, ey1, ex2, ey2 = (np.array(v, dtype=np.float64) for v in zip(*edges))
    y_low = np.minimum(ey1, ey2)
    y_high = np.maximum(ey1, ey2)
    row_min = max(int(np.floor(y_low.min() - 0.5)), 0)
    row_max = min(int(np.ceil(y_high.max())), height)
    centers = np.arange(width, dtype=np.float64) + 0.5
    for row in range(row_min, row_max):
        yc = row + 0.5
        live = (y_low <= yc) & (yc < y_high)
        if not live.any():
            continue
        t = (yc - ey1[live]) / (ey2[live] - ey1[live])
        xs = ex1[live] + t * (ex2[live] - ex1[live])
        # Parity of crossings strictly right of each pixel center.
        counts = (xs[None, :] > centers[:, None]).sum(axis=1)
        mask[row] = (counts & 1).astype(bool)
    return mask


_DIRS = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}
_VECS = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def trace_boundaries(mask: np.ndarray) -> list[Ring]:
    """Trace all crack-boundary rings of a boolean mask.

    Returned rings are closed (first point repeated last) with integer
    vertices in (x, y) order, oriented so outer rings have positive signed
    area. ``rasterize_rings`` of the result reproduces the mask exactly.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1)
    # Directed edges keeping the interior on the left in y-down coords.
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(x1, y1, x2, y2):
        edges.setdefault((x1, y1), []).append((x2, y2))

    ys, xs = np.nonzero(mask)
    for r, c in zip(ys.tolist(), xs.tolist()):
        if not padded[r, c + 1]:          # neighbor above
            add(c, r, c + 1, r)
        if not padded[r + 1, c + 2]:      # right
            add(c + 1, r, c + 1, r + 1)
        if not padded[r + 2, c + 1]:      # below
            add(c + 1, r + 1, c, r + 1)
        if not padded[r + 1, c]:          # left
            add(c, r + 1, c, r)

    rings: list[Ring] = []
    while edges:
        start = min(edges)
        ring = [start]
        prev_dir = None
        current = start
        while True:
            outgoing = edges[current]
            if len(outgoing) == 1 or prev_dir is None:
                nxt = outgoing.pop()
            else:
                # Pinch vertex: prefer the sharpest left turn so each ring
                # stays on its own side of the crack.
                def turn(target):
                    dx, dy = target[0] - current[0], target[1] - current[1]
                    return (_DIRS[(dx, dy)] - prev_dir) % 4
                outgoing.sort(key=turn)
                nxt = outgoing.pop(0)
            if not edges[current]:
                del edges[current]
            prev_dir = _DIRS[(nxt[0] - current[0], nxt[1] - current[1])]
            ring.append(nxt)
            current = nxt
            if current == start:
                break
        rings.append([(float(x), float(y)) for x, y in ring])
    return rings
