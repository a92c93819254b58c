"""Intensity family: 17 statistics of masked pixel values.

Standard deviations are population deviations (an object is the whole
population of its pixels); quantiles interpolate linearly between closest
ranks. Edge statistics restrict to in-mask pixels with a 4-neighbor
outside the mask.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..model import BoundingBox
from . import common


def _spread(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    std = float(np.sqrt(np.mean((values - mean) ** 2)))
    return mean, std


def intensity_features(patch: np.ndarray, mask: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    """17 values in manifest order for one object."""
    patch = np.asarray(patch, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if patch.shape != mask.shape:
        raise ShapeError(f"patch {patch.shape} vs mask {mask.shape}")

    values = patch[mask]
    integrated = float(values.sum())
    mean, std = _spread(values)
    q1, median, q3 = np.quantile(values, (0.25, 0.5, 0.75)).tolist()
    mad = float(np.quantile(np.abs(values - median), 0.5))

    ys, xs = np.nonzero(mask)
    cx = xs.sum() / float(len(xs))
    cy = ys.sum() / float(len(ys))
    if integrated > 0:
        wx = float((patch[mask] * xs).sum()) / integrated
        wy = float((patch[mask] * ys).sum()) / integrated
    else:
        wx, wy = cx, cy
    displacement = float(np.sqrt((wx - cx) ** 2 + (wy - cy) ** 2))

    edge_values = patch[common.edge_mask(mask)]
    edge_mean, edge_std = _spread(edge_values)

    return np.array([
        integrated,
        mean,
        std,
        float(values.min()),
        float(values.max()),
        median,
        mad,
        q1,
        q3,
        displacement,
        float(edge_values.sum()),
        edge_mean,
        edge_std,
        float(edge_values.min()),
        float(edge_values.max()),
        bbox.min_x + wx,
        bbox.min_y + wy,
    ])
