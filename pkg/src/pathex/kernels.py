"""Vectorized feature kernels over batch slabs.

Each kernel consumes a whole Slab (depth x edge x edge) and produces rows
for every slot at once. Moments, Hu invariants, ellipse fits,
co-occurrence matrices, radial profiles, and Zernike moments are computed
as stacked array operations. Boundary tracing, hulls, the distance
transform, and the intensity statistics run per slot on its bbox view —
the identical input the per-object path sees — partly because they are
inherently scalar, and for the intensity block because downstream
histogram comparisons require the two modes to agree to the bit, not just
to tolerance (a one-ulp drift in a reduction can hop a histogram bin).

Out-of-mask pixels contribute nothing anywhere: sums are mask-weighted,
pair counting requires both endpoints in-mask, and min/max reductions use
mask-conditioned fills.
"""

from __future__ import annotations

import numpy as np

from .batching import Slab
from .features import common
from .features.intensity import intensity_features
from .features import zernike as zmod
from .model import BoundingBox
from .manifest import (
    FEATURE_COUNT,
    RADIAL_BINS,
    RADIAL_WEDGES,
    TEXTURE_ANGLES,
    TEXTURE_SCALES,
)

_SHAPE_AT = 0
_TEXTURE_AT = 30
_INTENSITY_AT = 134
_DISTRIBUTION_AT = 151


def compute_slab_features(slab: Slab) -> np.ndarray:
    """(depth, 247) feature rows in manifest order."""
    depth, edge = slab.depth, slab.bucket_edge
    masks = slab.masks
    patches = slab.patches
    mask_f = masks.astype(np.float64)
    weighted = patches * mask_f

    out = np.empty((depth, FEATURE_COUNT))

    moments = _moment_stack(mask_f)
    mu = common.central_moments(moments)  # identities hold elementwise
    cx, cy = mu["cx"], mu["cy"]

    # Per-slot crop views feed the scalar geometry helpers and the whole
    # intensity block; everything else below is stack math.
    edt_stack = np.zeros_like(patches)
    per_object = np.empty((depth, 8))
    for k in range(depth):
        w, h = int(slab.bbox_sizes[k, 0]), int(slab.bbox_sizes[k, 1])
        crop_mask = masks[k, :h, :w]
        crop_patch = patches[k, :h, :w]
        per_object[k] = _scalar_geometry(crop_mask)
        bbox = BoundingBox(int(slab.offsets[k, 0]), int(slab.offsets[k, 1]),
                           int(slab.offsets[k, 0]) + w, int(slab.offsets[k, 1]) + h)
        out[k, _INTENSITY_AT : _INTENSITY_AT + 17] = intensity_features(
            crop_patch, crop_mask, bbox
        )
        edt_stack[k, :h, :w] = common.edt_inside(crop_mask)

    out[:, _SHAPE_AT : _SHAPE_AT + 30] = _shape_block(
        slab, moments, mu, per_object
    )
    out[:, _TEXTURE_AT : _TEXTURE_AT + 104] = _texture_block(patches, masks)
    out[:, _DISTRIBUTION_AT:] = _distribution_block(
        patches, masks, weighted, edt_stack, cx, cy
    )
    return out


# ---------------------------------------------------------------------------
# moments

def _moment_stack(mask_f: np.ndarray) -> dict[str, np.ndarray]:
    _, h, w = mask_f.shape
    x = np.arange(w, dtype=np.float64)
    y = np.arange(h, dtype=np.float64)
    cols = mask_f.sum(axis=1)  # (d, w)
    rows = mask_f.sum(axis=2)  # (d, h)
    xy = mask_f * x[None, None, :]
    x2y = mask_f * (x**2)[None, None, :]
    return {
        "m00": cols.sum(axis=1),
        "m10": cols @ x,
        "m20": cols @ x**2,
        "m30": cols @ x**3,
        "m01": rows @ y,
        "m02": rows @ y**2,
        "m03": rows @ y**3,
        "m11": (xy.sum(axis=2) * y[None, :]).sum(axis=1),
        "m21": (x2y.sum(axis=2) * y[None, :]).sum(axis=1),
        "m12": (xy.sum(axis=2) * (y**2)[None, :]).sum(axis=1),
    }


# ---------------------------------------------------------------------------
# blocks

def _scalar_geometry(mask: np.ndarray) -> np.ndarray:
    """Perimeter, hull metrics, Euler number, and radius statistics."""
    perimeter = common.traced_perimeter(mask)
    hull = common.convex_hull(common.boundary_points(mask))
    convex_area = float(common.convex_pixel_count(mask.shape, hull))
    feret_max, feret_min = common.feret_diameters(hull)
    euler = float(common.euler_number(mask))
    radii = common.edt_inside(mask)[mask]
    return np.array([
        perimeter, convex_area, feret_max, feret_min, euler,
        float(radii.mean()), float(np.median(radii)), float(radii.max()),
    ])


def _shape_block(slab, moments, mu, per_object) -> np.ndarray:
    area = moments["m00"]
    major, minor, ecc, orientation = common.ellipse_axes(mu)
    hu = common.hu_moments(mu)
    perimeter = per_object[:, 0]
    convex_area = per_object[:, 1]
    solidity = area / convex_area  # hull raster always covers the mask
    widths = slab.bbox_sizes[:, 0].astype(np.float64)
    heights = slab.bbox_sizes[:, 1].astype(np.float64)

    block = np.empty((slab.depth, 30))
    block[:, 0] = area
    block[:, 1] = perimeter
    block[:, 2] = convex_area
    block[:, 3] = solidity
    block[:, 4] = area / (widths * heights)
    block[:, 5] = ecc
    block[:, 6] = orientation
    block[:, 7] = major
    block[:, 8] = minor
    block[:, 9] = 4.0 * np.pi * area / perimeter**2
    block[:, 10] = perimeter**2 / (4.0 * np.pi * area)
    block[:, 11] = per_object[:, 2]
    block[:, 12] = per_object[:, 3]
    block[:, 13] = per_object[:, 4]
    block[:, 14] = slab.offsets[:, 0]
    block[:, 15] = slab.offsets[:, 1]
    block[:, 16] = slab.offsets[:, 0] + widths
    block[:, 17] = slab.offsets[:, 1] + heights
    block[:, 18] = slab.offsets[:, 0] + mu["cx"]
    block[:, 19] = slab.offsets[:, 1] + mu["cy"]
    block[:, 20] = per_object[:, 5]
    block[:, 21] = per_object[:, 6]
    block[:, 22] = per_object[:, 7]
    block[:, 23:30] = hu
    return block


def _texture_block(patches: np.ndarray, masks: np.ndarray) -> np.ndarray:
    depth = patches.shape[0]
    levels = _quantize_stack(patches, masks)
    blocks = []
    for scale in TEXTURE_SCALES:
        for angle in TEXTURE_ANGLES:
            counts = _glcm_stack(levels, masks, scale, angle)
            totals = counts.sum(axis=(1, 2))
            valid = totals > 0
            safe = np.where(valid, totals, 1.0)
            glcms = counts / safe[:, None, None]
            blocks.append(common.haralick_stats(glcms, valid))
    return np.concatenate(blocks, axis=1)


def _quantize_stack(patches, masks) -> np.ndarray:
    lo = np.where(masks, patches, np.inf).min(axis=(1, 2))
    hi = np.where(masks, patches, -np.inf).max(axis=(1, 2))
    flat = hi == lo
    span = np.where(flat, 1.0, hi - lo)
    t = (patches - lo[:, None, None]) / span[:, None, None] * 8.0
    levels = np.clip(np.floor(t), 0.0, 7.0).astype(np.uint8)
    levels[flat] = 0
    return levels


def _glcm_stack(levels, masks, scale, angle) -> np.ndarray:
    dy, dx = common.GLCM_OFFSETS[angle]
    dy, dx = dy * scale, dx * scale
    depth, h, w = masks.shape
    ys0, ys1 = max(0, -dy), min(h, h - dy)
    xs0, xs1 = max(0, -dx), min(w, w - dx)
    if ys0 >= ys1 or xs0 >= xs1:
        return np.zeros((depth, 8, 8))
    a_m = masks[:, ys0:ys1, xs0:xs1]
    b_m = masks[:, ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
    both = a_m & b_m
    slot = np.broadcast_to(np.arange(depth)[:, None, None], both.shape)[both]
    a = levels[:, ys0:ys1, xs0:xs1][both].astype(np.int64)
    b = levels[:, ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx][both].astype(np.int64)
    flat = np.bincount(slot * 64 + a * 8 + b, minlength=depth * 64)
    counts = flat.reshape(depth, 8, 8).astype(np.float64)
    return counts + counts.transpose(0, 2, 1)


def _distribution_block(patches, masks, weighted, edt_stack, cx, cy):
    depth, h, w = patches.shape
    x = np.arange(w, dtype=np.float64)
    y = np.arange(h, dtype=np.float64)
    dx = x[None, None, :] - cx[:, None, None]
    dy = y[None, :, None] - cy[:, None, None]
    d_center = np.sqrt(dx**2 + dy**2)

    with np.errstate(invalid="ignore", divide="ignore"):
        r = d_center / (d_center + edt_stack)
    bins = np.minimum(np.floor(RADIAL_BINS * r), RADIAL_BINS - 1)
    theta = np.arctan2(np.broadcast_to(dy, d_center.shape),
                       np.broadcast_to(dx, d_center.shape))
    wedges = np.minimum(np.floor((theta + np.pi) / (2.0 * np.pi) * RADIAL_WEDGES),
                        RADIAL_WEDGES - 1)

    slot = np.broadcast_to(np.arange(depth)[:, None, None], masks.shape)[masks]
    b_in = bins[masks].astype(np.int64)
    w_in = wedges[masks].astype(np.int64)
    v_in = patches[masks]

    counts = np.bincount(slot * RADIAL_BINS + b_in,
                         minlength=depth * RADIAL_BINS).reshape(depth, RADIAL_BINS)
    sums = np.bincount(slot * RADIAL_BINS + b_in, weights=v_in,
                       minlength=depth * RADIAL_BINS).reshape(depth, RADIAL_BINS)
    wedge_sums = np.bincount(
        (slot * RADIAL_BINS + b_in) * RADIAL_WEDGES + w_in, weights=v_in,
        minlength=depth * RADIAL_BINS * RADIAL_WEDGES,
    ).reshape(depth, RADIAL_BINS, RADIAL_WEDGES)

    area = masks.sum(axis=(1, 2)).astype(np.float64)
    total = np.bincount(slot, weights=v_in, minlength=depth)
    live = total > 0
    safe_total = np.where(live, total, 1.0)
    frac = sums / safe_total[:, None] * live[:, None]
    occupied = counts > 0
    pixel_frac = np.where(occupied, counts, 1.0) / area[:, None]
    mean_frac = np.where(occupied, frac / pixel_frac, 0.0)

    wedge_mean = wedge_sums.mean(axis=2)
    wedge_std = np.sqrt(((wedge_sums - wedge_mean[:, :, None]) ** 2).mean(axis=2))
    cv = np.where(wedge_mean > 0, wedge_std / np.where(wedge_mean > 0, wedge_mean, 1.0), 0.0)

    maxdist = np.where(masks, d_center, -np.inf).max(axis=(1, 2))
    radius = np.where(maxdist > 0, maxdist + 1.0, 0.0)
    moments = zmod.scaled_moment_stack(weighted, cx, cy, radius)
    mags, phases = zmod.zernike_from_moments(moments, radius, total)

    return np.concatenate([frac, mean_frac, cv, mags, phases], axis=1)
