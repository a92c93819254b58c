"""Intensity distribution family: radial-bin statistics and Zernike moments.

The normalized radius of an in-mask pixel is d_center / (d_center +
d_edge): 0 at the binary centroid, approaching 1 at the boundary. This
distance-transform form stays well ordered on non-convex objects. Bins
partition [0, 1) into 12 slices; 8 angular wedges around the centroid
support the per-bin coefficient of variation.
"""

from __future__ import annotations

import numpy as np

from ..manifest import RADIAL_BINS, RADIAL_WEDGES
from . import common, zernike


def radial_coordinates(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(radius, bin, wedge) arrays over the in-mask pixels, row-major."""
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    cx = xs.sum() / float(len(xs))
    cy = ys.sum() / float(len(ys))
    dx = xs - cx
    dy = ys - cy
    d_center = np.sqrt(dx**2 + dy**2)
    d_edge = common.edt_inside(mask)[mask]
    r = d_center / (d_center + d_edge)
    bins = np.minimum(np.floor(RADIAL_BINS * r), RADIAL_BINS - 1).astype(np.int64)
    theta = np.arctan2(dy, dx)
    wedges = np.minimum(
        np.floor((theta + np.pi) / (2.0 * np.pi) * RADIAL_WEDGES), RADIAL_WEDGES - 1
    ).astype(np.int64)
    return r, bins, wedges


def radial_distribution(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """36 values: FracAtD, MeanFrac, RadialCV per radial bin."""
    mask = np.asarray(mask, dtype=bool)
    values = np.asarray(patch, dtype=np.float64)[mask]
    _, bins, wedges = radial_coordinates(mask)
    counts = np.bincount(bins, minlength=RADIAL_BINS).astype(np.float64)
    sums = np.bincount(bins, weights=values, minlength=RADIAL_BINS)
    wedge_sums = np.bincount(
        bins * RADIAL_WEDGES + wedges, weights=values,
        minlength=RADIAL_BINS * RADIAL_WEDGES,
    ).reshape(RADIAL_BINS, RADIAL_WEDGES)

    total = float(values.sum())
    area = float(len(values))
    frac = np.zeros(RADIAL_BINS)
    mean_frac = np.zeros(RADIAL_BINS)
    if total > 0:
        frac = sums / total
        occupied = counts > 0
        mean_frac[occupied] = frac[occupied] / (counts[occupied] / area)

    wedge_mean = wedge_sums.mean(axis=1)
    wedge_std = np.sqrt(((wedge_sums - wedge_mean[:, None]) ** 2).mean(axis=1))
    cv = np.where(wedge_mean > 0, wedge_std / np.where(wedge_mean > 0, wedge_mean, 1.0), 0.0)
    return np.concatenate([frac, mean_frac, cv])


def zernike_features(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """60 values: 30 magnitudes then 30 phases, (n, m) in manifest order."""
    mask = np.asarray(mask, dtype=bool)
    patch = np.asarray(patch, dtype=np.float64)
    ys, xs = np.nonzero(mask)
    cx = xs.sum() / float(len(xs))
    cy = ys.sum() / float(len(ys))
    d_center = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    maxdist = float(d_center.max())
    radius = np.array([maxdist + 1.0 if maxdist > 0 else 0.0])
    weighted = (patch * mask)[None, :, :]
    total = np.array([float(patch[mask].sum())])
    moments = zernike.scaled_moment_stack(weighted, np.array([cx]), np.array([cy]), radius)
    mags, phases = zernike.zernike_from_moments(moments, radius, total)
    return np.concatenate([mags[0], phases[0]])


def distribution_features(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """96 values: radial bins then Zernike magnitudes and phases."""
    return np.concatenate([
        radial_distribution(patch, mask),
        zernike_features(patch, mask),
    ])
