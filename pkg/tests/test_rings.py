"""Rasterization and outline tracing, checked against a per-pixel oracle."""

import numpy as np
import pytest

from conftest import random_blob
from pathex.rings import rasterize_rings, signed_area, trace_boundaries


def even_odd_inside(rings, x: float, y: float) -> bool:
    """Ray-cast parity oracle, counting crossings strictly right of (x, y)."""
    crossings = 0
    for ring in rings:
        pts = list(ring)
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            if y1 == y2:
                continue
            lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
            if lo <= y < hi:
                t = (y - y1) / (y2 - y1)
                if x1 + t * (x2 - x1) > x:
                    crossings += 1
    return crossings % 2 == 1


def oracle_fill(rings, width, height):
    out = np.zeros((height, width), dtype=bool)
    for r in range(height):
        for c in range(width):
            out[r, c] = even_odd_inside(rings, c + 0.5, r + 0.5)
    return out


class TestRasterize:
    def test_square(self):
        ring = [(0, 0), (4, 0), (4, 4), (0, 4), (0, 0)]
        mask = rasterize_rings([ring], 6, 6)
        assert mask.sum() == 16
        assert mask[:4, :4].all()

    def test_square_with_hole(self):
        outer = [(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)]
        hole = [(3, 3), (7, 3), (7, 7), (3, 7), (3, 3)]
        mask = rasterize_rings([outer, hole], 10, 10)
        assert mask.sum() == 100 - 16

    def test_degenerate_collinear_ring_is_empty(self):
        ring = [(0, 0), (5, 5), (2, 2), (0, 0)]
        assert rasterize_rings([ring], 8, 8).sum() == 0

    @pytest.mark.parametrize("seed", range(20))
    def test_random_polygons_match_oracle(self, seed):
        # polygons kept strictly inside the grid: this differential is
        # about even-odd fill, not the clamping path
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 12))
        angles = np.sort(rng.uniform(0, 2 * np.pi, n))
        radius = rng.uniform(2.0, 12.5, n)
        cx, cy = rng.uniform(13, 19, 2)
        ring = [(cx + r * np.cos(a), cy + r * np.sin(a)) for a, r in zip(angles, radius)]
        ring.append(ring[0])
        got = rasterize_rings([ring], 32, 32)
        assert np.array_equal(got, oracle_fill([ring], 32, 32))

    def test_vertex_on_pixel_center_uses_top_left_rule(self):
        # Edges running exactly through pixel centers: left edge included,
        # right edge excluded.
        ring = [(0.5, 0.5), (2.5, 0.5), (2.5, 2.5), (0.5, 2.5), (0.5, 0.5)]
        mask = rasterize_rings([ring], 4, 4)
        assert np.array_equal(np.nonzero(mask)[1], np.array([0, 1, 0, 1]))
        assert mask.sum() == 4


class TestTrace:
    @pytest.mark.parametrize("seed", range(25))
    def test_roundtrip_random_masks(self, seed):
        rng = np.random.default_rng(1000 + seed)
        mask = random_blob(rng, int(rng.integers(3, 24)))
        rings = trace_boundaries(mask)
        back = rasterize_rings(rings, mask.shape[1], mask.shape[0])
        assert np.array_equal(back, mask)

    def test_single_pixel(self):
        rings = trace_boundaries(np.ones((1, 1), bool))
        assert len(rings) == 1
        assert signed_area(rings[0]) == 1.0

    def test_hole_orientation(self):
        mask = np.ones((6, 6), bool)
        mask[2:4, 2:4] = False
        rings = trace_boundaries(mask)
        areas = sorted(signed_area(r) for r in rings)
        assert len(rings) == 2
        assert areas[0] == -4.0 and areas[1] == 36.0

    def test_diagonal_pinch_reconstructs(self):
        mask = np.array([[1, 0], [0, 1]], dtype=bool)
        rings = trace_boundaries(mask)
        assert len(rings) == 2
        back = rasterize_rings(rings, 2, 2)
        assert np.array_equal(back, mask)
