"""Shared geometric and statistical primitives for the feature kernels.

Pinned conventions that both the per-object path and the slab kernels rely
on (the reference oracle re-implements them independently):

* Pixel "positions" are local (col, row) index pairs; a pixel's center is
  the index itself for distance and hull purposes.
* The perimeter traces 8-connected boundaries through pixel centers
  (axial step 1, diagonal sqrt(2)), outer and hole contours both counted;
  components of <= 2 pixels contribute 4 * area instead.
* Quantization maps in-mask intensities by floor((v - lo) / (hi - lo) * 8)
  clipped to 7; a flat patch maps to level 0.
* The in-mask distance transform measures Euclidean distance to the
  nearest out-of-mask pixel, with everything beyond the bbox counted as
  outside.
"""

from __future__ import annotations

import math

import cv2
import numpy as np
from scipy import ndimage

GLCM_LEVELS = 8
# (dy, dx) unit offsets per co-occurrence angle.
GLCM_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_EIGHT = np.ones((3, 3), dtype=bool)

_IDX = np.arange(GLCM_LEVELS, dtype=np.float64)
_I_GRID, _J_GRID = np.meshgrid(_IDX, _IDX, indexing="ij")
_PLUS_ONEHOT = np.equal.outer((_I_GRID + _J_GRID).ravel(),
                              np.arange(2 * GLCM_LEVELS - 1, dtype=np.float64)
                              ).astype(np.float64)
_MINUS_ONEHOT = np.equal.outer(np.abs(_I_GRID - _J_GRID).ravel(),
                               np.arange(GLCM_LEVELS, dtype=np.float64)
                               ).astype(np.float64)
_IDM_W = (1.0 / (1.0 + (_I_GRID - _J_GRID) ** 2)).ravel()
_IJ_W = (_I_GRID * _J_GRID).ravel()
_K_PLUS = np.arange(2 * GLCM_LEVELS - 1, dtype=np.float64)
_K_MINUS = np.arange(GLCM_LEVELS, dtype=np.float64)

IMC2_GAP_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# moments

def raw_moments(weights: np.ndarray) -> dict[str, float]:
    """Raw moments m_pq up to order 3 of a 2-D weight raster.

    ``weights`` is mask (0/1) or masked intensity; x is the column index,
    y the row index. Integer-valued inputs give exact sums.
    """
    h, w = weights.shape
    x = np.arange(w, dtype=np.float64)
    y = np.arange(h, dtype=np.float64)
    col = weights.sum(axis=0, dtype=np.float64)
    row = weights.sum(axis=1, dtype=np.float64)
    out = {"m00": float(col.sum())}
    out["m10"] = float(col @ x)
    out["m20"] = float(col @ x**2)
    out["m30"] = float(col @ x**3)
    out["m01"] = float(row @ y)
    out["m02"] = float(row @ y**2)
    out["m03"] = float(row @ y**3)
    xy = weights * x[None, :]
    out["m11"] = float((xy.sum(axis=1) * y).sum())
    out["m21"] = float(((weights * (x**2)[None, :]).sum(axis=1) * y).sum())
    out["m12"] = float((xy.sum(axis=1) * y**2).sum())
    return out


def central_moments(m: dict[str, float]) -> dict[str, float]:
    """Centroid and central moments mu_pq from raw moments."""
    cx = m["m10"] / m["m00"]
    cy = m["m01"] / m["m00"]
    mu = {
        "cx": cx,
        "cy": cy,
        "mu00": m["m00"],
        "mu20": m["m20"] - cx * m["m10"],
        "mu02": m["m02"] - cy * m["m01"],
        "mu11": m["m11"] - cx * m["m01"],
        "mu30": m["m30"] - 3.0 * cx * m["m20"] + 2.0 * cx**2 * m["m10"],
        "mu03": m["m03"] - 3.0 * cy * m["m02"] + 2.0 * cy**2 * m["m01"],
        "mu21": m["m21"] - 2.0 * cx * m["m11"] - cy * m["m20"] + 2.0 * cx**2 * m["m01"],
        "mu12": m["m12"] - 2.0 * cy * m["m11"] - cx * m["m02"] + 2.0 * cy**2 * m["m10"],
    }
    return mu


def hu_moments(mu: dict) -> np.ndarray:
    """The seven Hu invariants from central moments (phi7 kept signed).

    Accepts scalars or stacked arrays; the invariants land on the last
    axis.
    """
    m00 = np.asarray(mu["mu00"], dtype=np.float64)
    n20 = mu["mu20"] / m00**2
    n02 = mu["mu02"] / m00**2
    n11 = mu["mu11"] / m00**2
    n30 = mu["mu30"] / m00**2.5
    n03 = mu["mu03"] / m00**2.5
    n21 = mu["mu21"] / m00**2.5
    n12 = mu["mu12"] / m00**2.5
    a = n30 + n12
    b = n21 + n03
    c = n30 - 3.0 * n12
    d = 3.0 * n21 - n03
    return np.stack(
        [
            n20 + n02,
            (n20 - n02) ** 2 + 4.0 * n11**2,
            c**2 + d**2,
            a**2 + b**2,
            c * a * (a**2 - 3.0 * b**2) + d * b * (3.0 * a**2 - b**2),
            (n20 - n02) * (a**2 - b**2) + 4.0 * n11 * a * b,
            d * a * (a**2 - 3.0 * b**2) - c * b * (3.0 * a**2 - b**2),
        ],
        axis=-1,
    )


# An ellipse fit with an eigenvalue split this far below the mean variance
# is isotropic for our purposes: eccentricity and orientation of such fits
# are pure cancellation noise, so they pin to 0. Likewise a cross moment
# this far below the total variance reads as exactly axis-aligned. These
# floors are part of the feature definition (the oracle repeats them).
ISOTROPY_SPLIT_FLOOR = 1e-10
AXIS_ALIGNED_B_FLOOR = 1e-12


def ellipse_axes(mu: dict):
    """(major, minor, eccentricity, orientation_deg) of the moment ellipse.

    Orientation follows the y-up convention, degrees in (-90, 90] from the
    x-axis. Isotropic fits report eccentricity 0 and orientation 0.
    Scalar or stacked inputs.
    """
    m00 = np.asarray(mu["mu00"], dtype=np.float64)
    a = mu["mu20"] / m00
    b = mu["mu11"] / m00
    c = mu["mu02"] / m00
    mid = (a + c) / 2.0
    split = np.sqrt(((a - c) / 2.0) ** 2 + b**2)
    isotropic = split <= ISOTROPY_SPLIT_FLOOR * mid
    lam1 = mid + split
    lam2 = np.maximum(mid - split, 0.0)
    major = 4.0 * np.sqrt(lam1)
    minor = np.where(isotropic, major, 4.0 * np.sqrt(lam2))
    with np.errstate(invalid="ignore", divide="ignore"):
        ecc = np.sqrt(np.maximum(1.0 - lam2 / np.where(lam1 > 0, lam1, 1.0), 0.0))
    ecc = np.where(isotropic | (lam1 <= 0), 0.0, ecc)
    num = np.where(np.abs(b) > AXIS_ALIGNED_B_FLOOR * (a + c), -2.0 * b, 0.0)
    theta = 0.5 * np.degrees(np.arctan2(num, a - c))
    theta = np.where(theta <= -90.0, theta + 180.0, theta)
    theta = np.where(isotropic, 0.0, theta)
    return major, minor, ecc, theta


# ---------------------------------------------------------------------------
# boundary / hull geometry

def _contour_length(contour: np.ndarray) -> float:
    # cv2.arcLength works in float32; redo the sum in float64.
    pts = contour.reshape(-1, 2).astype(np.float64)
    if len(pts) < 2:
        return 0.0
    deltas = np.diff(np.vstack([pts, pts[:1]]), axis=0)
    return float(np.sqrt((deltas**2).sum(axis=1)).sum())


def traced_perimeter(mask: np.ndarray) -> float:
    """Boundary-trace perimeter with the small-component crack fallback."""
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    labeled, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return 0.0
    areas = np.bincount(labeled.ravel())[1:]
    total = 0.0
    small = np.flatnonzero(areas <= 2) + 1
    if small.size:
        total += float(4 * areas[small - 1].sum())
        mask = np.where(np.isin(labeled, small), 0, mask).astype(np.uint8)
        if not mask.any():
            return total
    contours, _ = cv2.findContours(mask, cv2.RETR_CCOMP, cv2.CHAIN_APPROX_NONE)
    total += float(sum(_contour_length(c) for c in contours))
    return total


def boundary_points(mask: np.ndarray) -> np.ndarray:
    """(x, y) float coordinates of in-mask pixels on the 4-boundary."""
    edge = edge_mask(mask)
    ys, xs = np.nonzero(edge)
    return np.column_stack([xs, ys]).astype(np.float64)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, CCW; collinear inputs collapse to 2 points."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) <= 2:
        return np.unique(points, axis=0)
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = [(float(x), float(y)) for x, y in points[order]]

    def chain(seq):
        out: list = []
        for px, py in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (py - oy) - (ay - oy) * (px - ox) > 0:
                    break
                out.pop()
            out.append((px, py))
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1], dtype=np.float64)
    if len(hull) < 3:
        return np.array([pts[0], pts[-1]]) if pts[0] != pts[-1] else np.array([pts[0]])
    return hull


def convex_pixel_count(shape: tuple[int, int], hull: np.ndarray) -> int:
    """Pixels of a (h, w) grid whose center is inside or on the hull.

    Hull vertices are integer pixel-center coordinates, so every test
    runs in exact integer arithmetic: any correct reimplementation counts
    the identical pixel set. A point hull counts 1; a segment hull counts
    the lattice points it passes through (gcd + 1).
    """
    hull = np.asarray(hull)
    if len(hull) == 0:
        return 0
    verts = np.rint(hull).astype(np.int64)
    if len(verts) == 1:
        return 1
    if len(verts) == 2:
        dx = int(abs(verts[1, 0] - verts[0, 0]))
        dy = int(abs(verts[1, 1] - verts[0, 1]))
        return math.gcd(dx, dy) + 1

    x, y = verts[:, 0], verts[:, 1]
    orient = 1 if int(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) > 0 else -1
    h, w = shape
    gx, gy = np.meshgrid(np.arange(w, dtype=np.int64), np.arange(h, dtype=np.int64))
    px = gx.ravel()
    py = gy.ravel()
    keep = np.arange(px.size)
    n = len(verts)
    for i in range(n):
        if keep.size == 0:
            return 0
        x1, y1 = int(verts[i, 0]), int(verts[i, 1])
        x2, y2 = int(verts[(i + 1) % n, 0]), int(verts[(i + 1) % n, 1])
        cross = (x2 - x1) * (py[keep] - y1) - (y2 - y1) * (px[keep] - x1)
        keep = keep[orient * cross >= 0]
    return int(keep.size)


def feret_diameters(hull: np.ndarray) -> tuple[float, float]:
    """(max, min) caliper diameters of a hull point set."""
    n = len(hull)
    if n <= 1:
        return 0.0, 0.0
    diff = hull[:, None, :] - hull[None, :, :]
    dmax = float(np.sqrt((diff**2).sum(-1)).max())
    if n == 2:
        return dmax, 0.0
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.sqrt((edges**2).sum(-1))
    keep = lengths > 0
    edges, lengths = edges[keep], lengths[keep]
    if len(edges) == 0:
        return dmax, 0.0
    rel = hull[None, :, :] - hull[keep][:, None, :]
    heights = np.abs(edges[:, 0, None] * rel[:, :, 1] - edges[:, 1, None] * rel[:, :, 0])
    widths = heights.max(axis=1) / lengths
    return dmax, float(widths.min())


def euler_number(mask: np.ndarray) -> int:
    """Connected components (8-conn) minus holes (4-conn background)."""
    mask = np.asarray(mask, dtype=bool)
    _, components = ndimage.label(mask, structure=_EIGHT)
    padded = np.pad(mask, 1)
    _, bg_parts = ndimage.label(~padded, structure=_FOUR)
    return int(components - (bg_parts - 1))


def edt_inside(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the mask exterior, 0 outside the mask."""
    padded = np.pad(np.asarray(mask, dtype=bool), 1)
    return ndimage.distance_transform_edt(padded)[1:-1, 1:-1]


def edge_mask(mask: np.ndarray) -> np.ndarray:
    """In-mask pixels with a 4-neighbor outside (borders count as outside)."""
    mask = np.asarray(mask, dtype=bool)
    interior = np.zeros_like(mask)
    interior[1:-1, 1:-1] = (
        mask[1:-1, 1:-1]
        & mask[:-2, 1:-1] & mask[2:, 1:-1] & mask[1:-1, :-2] & mask[1:-1, 2:]
    )
    return mask & ~interior


# ---------------------------------------------------------------------------
# texture primitives

def quantize8(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Map in-mask intensities onto levels 0..7 (flat patches -> level 0)."""
    inside = values[mask]
    lo = float(inside.min())
    hi = float(inside.max())
    if hi == lo:
        return np.zeros(values.shape, dtype=np.uint8)
    t = (values - lo) / (hi - lo) * 8.0
    return np.clip(np.floor(t), 0.0, 7.0).astype(np.uint8)


def glcm_counts(levels: np.ndarray, mask: np.ndarray, scale: int,
                angle: int) -> np.ndarray:
    """Symmetric co-occurrence counts (int64, 8x8) for one offset."""
    dy, dx = GLCM_OFFSETS[angle]
    dy, dx = dy * scale, dx * scale
    h, w = mask.shape
    ys0 = max(0, -dy)
    ys1 = min(h, h - dy)
    xs0 = max(0, -dx)
    xs1 = min(w, w - dx)
    counts = np.zeros((GLCM_LEVELS, GLCM_LEVELS), dtype=np.int64)
    if ys0 >= ys1 or xs0 >= xs1:
        return counts
    a_mask = mask[ys0:ys1, xs0:xs1]
    b_mask = mask[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
    both = a_mask & b_mask
    if not both.any():
        return counts
    a = levels[ys0:ys1, xs0:xs1][both].astype(np.int64)
    b = levels[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx][both].astype(np.int64)
    flat = np.bincount(a * GLCM_LEVELS + b, minlength=GLCM_LEVELS**2)
    counts = flat.reshape(GLCM_LEVELS, GLCM_LEVELS)
    return counts + counts.T


def _xlog2(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def haralick_stats(glcms: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """The 13 co-occurrence statistics for a stack of normalized GLCMs.

    ``glcms`` is (..., 8, 8) with each valid matrix summing to 1;
    invalid slots come back as all-zero rows. Order matches
    manifest.HARALICK_NAMES.
    """
    shape = glcms.shape[:-2]
    flat = glcms.reshape(-1, GLCM_LEVELS * GLCM_LEVELS)
    n = flat.shape[0]
    px = glcms.reshape(-1, GLCM_LEVELS, GLCM_LEVELS).sum(axis=2)
    py = glcms.reshape(-1, GLCM_LEVELS, GLCM_LEVELS).sum(axis=1)
    pplus = flat @ _PLUS_ONEHOT
    pminus = flat @ _MINUS_ONEHOT

    asm = (flat**2).sum(axis=1)
    contrast = pminus @ (_K_MINUS**2)
    mu_x = px @ _IDX
    mu_y = py @ _IDX
    var_x = (((_IDX[None, :] - mu_x[:, None]) ** 2) * px).sum(axis=1)
    var_y = (((_IDX[None, :] - mu_y[:, None]) ** 2) * py).sum(axis=1)
    sigma = np.sqrt(var_x) * np.sqrt(var_y)
    num = flat @ _IJ_W - mu_x * mu_y
    with np.errstate(invalid="ignore", divide="ignore"):
        correlation = np.where(sigma > 0, num / np.where(sigma > 0, sigma, 1.0), 0.0)
    idm = flat @ _IDM_W
    sum_avg = pplus @ _K_PLUS
    sum_var = (((_K_PLUS[None, :] - sum_avg[:, None]) ** 2) * pplus).sum(axis=1)
    sum_ent = -_xlog2(pplus).sum(axis=1)
    entropy = -_xlog2(flat).sum(axis=1)
    mu_d = pminus @ _K_MINUS
    diff_var = (((_K_MINUS[None, :] - mu_d[:, None]) ** 2) * pminus).sum(axis=1)
    diff_ent = -_xlog2(pminus).sum(axis=1)

    hx = -_xlog2(px).sum(axis=1)
    hy = -_xlog2(py).sum(axis=1)
    pxpy = px[:, :, None] * py[:, None, :]
    p3 = flat.reshape(n, GLCM_LEVELS, GLCM_LEVELS)
    hxy1_terms = np.zeros_like(p3)
    nz = p3 > 0
    hxy1_terms[nz] = p3[nz] * np.log2(pxpy[nz])
    hxy1 = -hxy1_terms.sum(axis=(1, 2))
    hxy2 = -_xlog2(pxpy).sum(axis=(1, 2))
    hmax = np.maximum(hx, hy)
    imc1 = np.where(hmax > 0, (entropy - hxy1) / np.where(hmax > 0, hmax, 1.0), 0.0)
    gap = hxy2 - entropy
    imc2 = np.where(gap < IMC2_GAP_FLOOR, 0.0,
                    np.sqrt(np.maximum(0.0, 1.0 - np.exp(-2.0 * gap))))

    stats = np.stack([
        asm, contrast, correlation, var_x, idm, sum_avg, sum_var, sum_ent,
        entropy, diff_var, diff_ent, imc1, imc2,
    ], axis=1)
    stats *= valid.reshape(-1, 1)
    return stats.reshape(*shape, 13)
