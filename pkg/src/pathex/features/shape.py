"""Size & shape family: 30 features from the binary mask alone."""

from __future__ import annotations

import numpy as np

from ..model import BoundingBox
from . import common


def shape_features(mask: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    """30 values in manifest order for one object's local mask."""
    mask = np.asarray(mask, dtype=bool)
    area = float(np.count_nonzero(mask))

    m = common.raw_moments(mask.astype(np.float64))
    mu = common.central_moments(m)
    major, minor, ecc, orientation = common.ellipse_axes(mu)
    hu = common.hu_moments(mu)

    perimeter = common.traced_perimeter(mask)
    hull = common.convex_hull(common.boundary_points(mask))
    convex_area = float(common.convex_pixel_count(mask.shape, hull))
    solidity = area / convex_area
    feret_max, feret_min = common.feret_diameters(hull)

    form_factor = 4.0 * np.pi * area / perimeter**2
    compactness = perimeter**2 / (4.0 * np.pi * area)

    edt = common.edt_inside(mask)
    radii = edt[mask]

    out = np.empty(30)
    out[0] = area
    out[1] = perimeter
    out[2] = convex_area
    out[3] = solidity
    out[4] = area / float(bbox.width * bbox.height)
    out[5] = ecc
    out[6] = orientation
    out[7] = major
    out[8] = minor
    out[9] = form_factor
    out[10] = compactness
    out[11] = feret_max
    out[12] = feret_min
    out[13] = float(common.euler_number(mask))
    out[14] = float(bbox.min_x)
    out[15] = float(bbox.min_y)
    out[16] = float(bbox.max_x)
    out[17] = float(bbox.max_y)
    out[18] = bbox.min_x + mu["cx"]
    out[19] = bbox.min_y + mu["cy"]
    out[20] = float(radii.mean())
    out[21] = float(np.median(radii))
    out[22] = float(radii.max())
    out[23:30] = hu
    return out
