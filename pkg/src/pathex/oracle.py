"""Independent, deliberately naive reference implementations.

Everything here recomputes the feature definitions from scratch, one
object at a time, sharing nothing with the extraction kernels beyond the
manifest ordering and the spec-level degenerate-value rules (those rules
are part of each feature's definition, not of any implementation).
Differential tests and the ``compare``/``bench`` commands treat this
module as ground truth; its slowness is intentional — it is also the
sequential baseline the batched engine is timed against.

Discrete decisions (quantization levels, radial bin and wedge indices)
repeat the exact arithmetic expressions of the definitions so that both
sides bucket every pixel identically; the reductions around them are all
recomputed independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .manifest import (
    DEFAULT_MANIFEST,
    RADIAL_BINS,
    RADIAL_WEDGES,
    ZERNIKE_INDICES,
)
from .model import BoundingBox, RegionSet, bbox_intersects

_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
_SCALES = (1, 3)
_ANGLES = (0, 45, 90, 135)
_PHASE_REL_FLOOR = 1e-3  # of the (0,0) moment's magnitude 1/(pi R^2)
_REAL_AXIS_FLOOR = 1e-6
_IMC2_FLOOR = 1e-12
_ISOTROPY_FLOOR = 1e-10
_AXIS_B_FLOOR = 1e-12

_N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_N8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


# ---------------------------------------------------------------------------
# flood fills, holes, boundary tracing

def _components(mask: np.ndarray, connectivity: int) -> list[np.ndarray]:
    """Connected pixel groups as (k, 2) row/col arrays, scan order."""
    h, w = mask.shape
    offsets = _N8 if connectivity == 8 else _N4
    seen = np.zeros_like(mask, dtype=bool)
    groups = []
    for r0 in range(h):
        for c0 in range(w):
            if not mask[r0, c0] or seen[r0, c0]:
                continue
            stack = [(r0, c0)]
            seen[r0, c0] = True
            pixels = []
            while stack:
                r, c = stack.pop()
                pixels.append((r, c))
                for dr, dc in offsets:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        stack.append((nr, nc))
            groups.append(np.array(pixels, dtype=np.int64))
    return groups


def _holes(mask: np.ndarray) -> list[np.ndarray]:
    """Background regions (4-connected) fully enclosed by the mask."""
    padded = np.pad(mask, 1)
    inverse = ~padded
    groups = _components(inverse, 4)
    holes = []
    for grp in groups:
        if (grp == 0).any() or (grp[:, 0] == padded.shape[0] - 1).any() \
                or (grp[:, 1] == padded.shape[1] - 1).any():
            continue  # touches the border: outside, not a hole
        holes.append(grp - 1)
    return holes


_CLOCKWISE = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _tour_length(mask: np.ndarray, start: tuple[int, int],
                 backtrack: tuple[int, int]) -> float:
    """Length of the closed Moore-neighbor border tour through ``start``.

    ``backtrack`` is a background neighbor of ``start`` seeding the
    clockwise scan. The deterministic (pixel, backtrack) walk eventually
    repeats a state; the steps between the first and second visit of that
    state form the closed border cycle whose length is returned.
    """
    h, w = mask.shape

    def advance(pixel, back):
        k = _CLOCKWISE.index((back[0] - pixel[0], back[1] - pixel[1]))
        for step in range(1, 9):
            dr, dc = _CLOCKWISE[(k + step) % 8]
            cand = (pixel[0] + dr, pixel[1] + dc)
            if 0 <= cand[0] < h and 0 <= cand[1] < w and mask[cand]:
                pr, pc = _CLOCKWISE[(k + step - 1) % 8]
                return cand, (pixel[0] + pr, pixel[1] + pc)
        return None, back

    seen: dict = {}
    state = (start, backtrack)
    total = 0.0
    while state not in seen:
        seen[state] = total
        pixel, back = state
        nxt, nb = advance(pixel, back)
        if nxt is None:
            return 0.0  # isolated pixel: nothing to walk
        total += math.sqrt((nxt[0] - pixel[0]) ** 2 + (nxt[1] - pixel[1]) ** 2)
        state = (nxt, nb)
    return total - seen[state]


def _perimeter(mask: np.ndarray) -> float:
    """Outer and hole boundary traces; tiny components fall back to 4*area."""
    total = 0.0
    for grp in _components(mask, 8):
        if len(grp) <= 2:
            total += 4.0 * len(grp)
            continue
        top = grp[np.lexsort((grp[:, 1], grp[:, 0]))][0]
        start = (int(top[0]), int(top[1]))
        total += _tour_length(mask, start, (start[0], start[1] - 1))
    for hole in _holes(mask):
        top = hole[np.lexsort((hole[:, 1], hole[:, 0]))][0]
        start = (int(top[0]) - 1, int(top[1]))          # pixel above the hole
        total += _tour_length(mask, start, (start[0] + 1, start[1]))
    return total


# ---------------------------------------------------------------------------
# geometry

def _hull_metrics(mask: np.ndarray) -> tuple[float, float, float]:
    """(convex_pixel_area, feret_max, feret_min) over boundary pixel centers.

    Convex area counts the grid pixels whose center falls inside or on the
    convex hull (exact integer half-plane tests); degenerate hulls count
    the lattice points on their segment.
    """
    pts = []
    h, w = mask.shape
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            on_edge = r == 0 or r == h - 1 or c == 0 or c == w - 1
            if not on_edge:
                on_edge = not (mask[r - 1, c] and mask[r + 1, c]
                               and mask[r, c - 1] and mask[r, c + 1])
            if on_edge:
                pts.append((c, r))
    points = np.array(pts, dtype=np.int64)

    def max_pairwise(arr: np.ndarray) -> float:
        best = 0.0
        for i in range(len(arr)):
            d2 = ((arr[i + 1 :] - arr[i]) ** 2).sum(axis=1)
            if d2.size:
                best = max(best, math.sqrt(int(d2.max())))
        return best

    gy, gx = np.nonzero(np.ones((h, w), dtype=bool))

    def on_segment_count(p, q) -> int:
        cross = (q[0] - p[0]) * (gy - p[1]) - (q[1] - p[1]) * (gx - p[0])
        within = (
            (min(p[0], q[0]) <= gx) & (gx <= max(p[0], q[0]))
            & (min(p[1], q[1]) <= gy) & (gy <= max(p[1], q[1]))
        )
        return int(((cross == 0) & within).sum())

    try:
        hull = ConvexHull(points.astype(np.float64))
    except (QhullError, ValueError):
        if len(points) == 1:
            return 1.0, 0.0, 0.0
        ext = points[np.lexsort((points[:, 1], points[:, 0]))]
        return float(on_segment_count(ext[0], ext[-1])), max_pairwise(points), 0.0
    verts = points[hull.vertices]
    inside = np.ones(gx.size, dtype=bool)
    n = len(verts)
    area2 = 0
    for i in range(n):
        p, q = verts[i], verts[(i + 1) % n]
        area2 += int(p[0]) * int(q[1]) - int(q[0]) * int(p[1])
    orient = 1 if area2 > 0 else -1
    for i in range(n):
        p, q = verts[i], verts[(i + 1) % n]
        cross = (int(q[0]) - int(p[0])) * (gy - int(p[1])) \
            - (int(q[1]) - int(p[1])) * (gx - int(p[0]))
        inside &= orient * cross >= 0
    convex_area = float(inside.sum())

    fmax = max_pairwise(verts)
    fmin = math.inf
    for i in range(n):
        p, q = verts[i].astype(np.float64), verts[(i + 1) % n].astype(np.float64)
        edge = q - p
        norm = math.sqrt(edge[0] ** 2 + edge[1] ** 2)
        if norm == 0:
            continue
        heights = np.abs(edge[0] * (verts[:, 1] - p[1]) - edge[1] * (verts[:, 0] - p[0]))
        fmin = min(fmin, float(heights.max()) / norm)
    return convex_area, fmax, fmin


def _distance_to_exterior(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance for every in-mask pixel (row-major order)."""
    padded = np.pad(mask, 1)
    background = ~padded
    near = np.zeros_like(background)
    for dr, dc in _N8:
        shifted = np.zeros_like(padded)
        src_r = slice(max(0, dr), padded.shape[0] + min(0, dr))
        dst_r = slice(max(0, -dr), padded.shape[0] + min(0, -dr))
        src_c = slice(max(0, dc), padded.shape[1] + min(0, dc))
        dst_c = slice(max(0, -dc), padded.shape[1] + min(0, -dc))
        shifted[dst_r, dst_c] = padded[src_r, src_c]
        near |= background & shifted
    cand_r, cand_c = np.nonzero(near)
    ys, xs = np.nonzero(padded)
    out = np.empty(len(ys), dtype=np.float64)
    chunk = max(1, 2_000_000 // max(1, len(cand_r)))
    for i in range(0, len(ys), chunk):
        dr = ys[i : i + chunk, None] - cand_r[None, :]
        dc = xs[i : i + chunk, None] - cand_c[None, :]
        d2 = (dr * dr + dc * dc).min(axis=1)
        out[i : i + chunk] = np.sqrt(d2.astype(np.float64))
    return out


# ---------------------------------------------------------------------------
# the 247-vector

def oracle_features(patch: np.ndarray, mask: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    """Reference 247-vector for one unpadded object, manifest order."""
    mask = np.asarray(mask, dtype=bool)
    patch = np.asarray(patch, dtype=np.float64)
    if not mask.any():
        raise ValueError("oracle requires a non-empty mask")
    if patch.shape != mask.shape:
        raise ValueError("patch and mask dimensions differ")

    out = np.empty(len(DEFAULT_MANIFEST))
    out[0:30] = _shape_vector(mask, bbox)
    out[30:134] = _texture_vector(patch, mask)
    out[134:151] = _intensity_vector(patch, mask, bbox)
    out[151:247] = _distribution_vector(patch, mask)
    return out


def _shape_vector(mask: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    n = len(xs)
    area = float(n)
    cx = float(xs.sum()) / n
    cy = float(ys.sum()) / n
    dx = xs - cx
    dy = ys - cy
    mu20 = float((dx * dx).sum())
    mu02 = float((dy * dy).sum())
    mu11 = float((dx * dy).sum())
    mu30 = float((dx**3).sum())
    mu03 = float((dy**3).sum())
    mu21 = float((dx * dx * dy).sum())
    mu12 = float((dx * dy * dy).sum())

    n20, n02, n11 = mu20 / n**2, mu02 / n**2, mu11 / n**2
    n30, n03 = mu30 / n**2.5, mu03 / n**2.5
    n21, n12 = mu21 / n**2.5, mu12 / n**2.5
    a_ = n30 + n12
    b_ = n21 + n03
    c_ = n30 - 3.0 * n12
    d_ = 3.0 * n21 - n03
    hu = [
        n20 + n02,
        (n20 - n02) ** 2 + 4.0 * n11**2,
        c_**2 + d_**2,
        a_**2 + b_**2,
        c_ * a_ * (a_**2 - 3.0 * b_**2) + d_ * b_ * (3.0 * a_**2 - b_**2),
        (n20 - n02) * (a_**2 - b_**2) + 4.0 * n11 * a_ * b_,
        d_ * a_ * (a_**2 - 3.0 * b_**2) - c_ * b_ * (3.0 * a_**2 - b_**2),
    ]

    va = mu20 / n
    vb = mu11 / n
    vc = mu02 / n
    mid = (va + vc) / 2.0
    split = math.sqrt(((va - vc) / 2.0) ** 2 + vb**2)
    if split <= _ISOTROPY_FLOOR * mid:
        lam1 = mid + split
        major = 4.0 * math.sqrt(lam1)
        minor = major
        ecc = 0.0
        theta = 0.0
    else:
        lam1 = mid + split
        lam2 = max(mid - split, 0.0)
        major = 4.0 * math.sqrt(lam1)
        minor = 4.0 * math.sqrt(lam2)
        ecc = math.sqrt(max(1.0 - lam2 / lam1, 0.0))
        num = -2.0 * vb if abs(vb) > _AXIS_B_FLOOR * (va + vc) else 0.0
        theta = 0.5 * math.degrees(np.arctan2(num, va - vc))
        if theta <= -90.0:
            theta += 180.0

    perimeter = _perimeter(mask)
    convex_area, feret_max, feret_min = _hull_metrics(mask)
    solidity = area / convex_area
    radii = _distance_to_exterior(mask)
    euler = len(_components(mask, 8)) - len(_holes(mask))

    return np.array([
        area,
        perimeter,
        convex_area,
        solidity,
        area / float(bbox.width * bbox.height),
        ecc,
        theta,
        major,
        minor,
        4.0 * math.pi * area / perimeter**2,
        perimeter**2 / (4.0 * math.pi * area),
        feret_max,
        feret_min,
        float(euler),
        float(bbox.min_x),
        float(bbox.min_y),
        float(bbox.max_x),
        float(bbox.max_y),
        bbox.min_x + cx,
        bbox.min_y + cy,
        float(radii.mean()),
        _median(np.sort(radii)),
        float(radii.max()),
        *hu,
    ])


def _median(sorted_values: np.ndarray) -> float:
    n = len(sorted_values)
    if n % 2 == 1:
        return float(sorted_values[n // 2])
    return float((sorted_values[n // 2 - 1] + sorted_values[n // 2]) / 2.0)


def _quantile(sorted_values: np.ndarray, q: float) -> float:
    """Linear interpolation between closest ranks (type 7)."""
    n = len(sorted_values)
    pos = (n - 1) * q
    lo = int(math.floor(pos))
    if lo + 1 >= n:
        return float(sorted_values[-1])
    frac = pos - lo
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def _texture_vector(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    inside = patch[mask]
    lo = float(inside.min())
    hi = float(inside.max())
    levels = np.zeros((h, w), dtype=np.int64)
    if hi > lo:
        t = (patch - lo) / (hi - lo) * 8.0
        levels = np.clip(np.floor(t), 0.0, 7.0).astype(np.int64)

    coords = list(zip(*np.nonzero(mask)))
    out = []
    for scale in _SCALES:
        for angle in _ANGLES:
            dy, dx = _OFFSETS[angle]
            dy, dx = dy * scale, dx * scale
            counts = np.zeros((8, 8), dtype=np.int64)
            for r, c in coords:
                nr, nc = r + dy, c + dx
                if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
                    counts[levels[r, c], levels[nr, nc]] += 1
            sym = counts + counts.T
            total = int(sym.sum())
            if total == 0:
                out.extend([0.0] * 13)
                continue
            out.extend(_haralick(sym / float(total)))
    return np.array(out)


def _haralick(p: np.ndarray) -> list[float]:
    def xlog2(v: float) -> float:
        return v * math.log2(v) if v > 0 else 0.0

    px = p.sum(axis=1)
    py = p.sum(axis=0)
    pplus = np.zeros(15)
    pminus = np.zeros(8)
    for i in range(8):
        for j in range(8):
            pplus[i + j] += p[i, j]
            pminus[abs(i - j)] += p[i, j]

    asm = float((p * p).sum())
    contrast = sum(k * k * pminus[k] for k in range(8))
    mu_x = sum(i * px[i] for i in range(8))
    mu_y = sum(j * py[j] for j in range(8))
    var_x = sum((i - mu_x) ** 2 * px[i] for i in range(8))
    var_y = sum((j - mu_y) ** 2 * py[j] for j in range(8))
    sigma = math.sqrt(var_x) * math.sqrt(var_y)
    if sigma > 0:
        corr = (sum(i * j * p[i, j] for i in range(8) for j in range(8)) - mu_x * mu_y) / sigma
    else:
        corr = 0.0
    idm = sum(p[i, j] / (1.0 + (i - j) ** 2) for i in range(8) for j in range(8))
    sum_avg = sum(k * pplus[k] for k in range(15))
    sum_var = sum((k - sum_avg) ** 2 * pplus[k] for k in range(15))
    sum_ent = -sum(xlog2(v) for v in pplus)
    entropy = -sum(xlog2(v) for v in p.ravel())
    mu_d = sum(k * pminus[k] for k in range(8))
    diff_var = sum((k - mu_d) ** 2 * pminus[k] for k in range(8))
    diff_ent = -sum(xlog2(v) for v in pminus)
    hx = -sum(xlog2(v) for v in px)
    hy = -sum(xlog2(v) for v in py)
    hxy1 = -sum(
        p[i, j] * math.log2(px[i] * py[j])
        for i in range(8) for j in range(8) if p[i, j] > 0
    )
    hxy2 = -sum(xlog2(px[i] * py[j]) for i in range(8) for j in range(8))
    imc1 = (entropy - hxy1) / max(hx, hy) if max(hx, hy) > 0 else 0.0
    gap = hxy2 - entropy
    imc2 = 0.0 if gap < _IMC2_FLOOR else math.sqrt(max(0.0, 1.0 - math.exp(-2.0 * gap)))
    return [asm, contrast, corr, var_x, idm, sum_avg, sum_var, sum_ent,
            entropy, diff_var, diff_ent, imc1, imc2]


def _intensity_vector(patch: np.ndarray, mask: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    values = patch[mask]
    n = len(values)
    integrated = float(values.sum())
    mean = integrated / n
    std = math.sqrt(float(((values - mean) ** 2).sum()) / n)
    ordered = np.sort(values)
    median = _median(ordered)
    mad = _median(np.sort(np.abs(values - median)))
    cx = float(xs.sum()) / n
    cy = float(ys.sum()) / n
    if integrated > 0:
        wx = float((values * xs).sum()) / integrated
        wy = float((values * ys).sum()) / integrated
    else:
        wx, wy = cx, cy

    h, w = mask.shape
    edge_vals = []
    for r, c in zip(ys.tolist(), xs.tolist()):
        if r == 0 or r == h - 1 or c == 0 or c == w - 1 or not (
            mask[r - 1, c] and mask[r + 1, c] and mask[r, c - 1] and mask[r, c + 1]
        ):
            edge_vals.append(patch[r, c])
    edge = np.array(edge_vals)
    edge_mean = float(edge.mean())
    edge_std = math.sqrt(float(((edge - edge_mean) ** 2).sum()) / len(edge))

    return np.array([
        integrated,
        mean,
        std,
        float(ordered[0]),
        float(ordered[-1]),
        median,
        mad,
        _quantile(ordered, 0.25),
        _quantile(ordered, 0.75),
        math.sqrt((wx - cx) ** 2 + (wy - cy) ** 2),
        float(edge.sum()),
        edge_mean,
        edge_std,
        float(edge.min()),
        float(edge.max()),
        bbox.min_x + wx,
        bbox.min_y + wy,
    ])


def _distribution_vector(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    n = len(xs)
    values = patch[mask]
    cx = float(xs.sum()) / n
    cy = float(ys.sum()) / n
    dx = xs - cx
    dy = ys - cy
    d_center = np.sqrt(dx**2 + dy**2)
    d_edge = _distance_to_exterior(mask)
    r = d_center / (d_center + d_edge)
    bins = np.minimum(np.floor(RADIAL_BINS * r), RADIAL_BINS - 1).astype(np.int64)
    theta = np.arctan2(dy, dx)
    wedges = np.minimum(
        np.floor((theta + np.pi) / (2.0 * np.pi) * RADIAL_WEDGES), RADIAL_WEDGES - 1
    ).astype(np.int64)

    bin_sum = np.zeros(RADIAL_BINS)
    bin_count = np.zeros(RADIAL_BINS)
    wedge_sum = np.zeros((RADIAL_BINS, RADIAL_WEDGES))
    for k in range(n):
        bin_sum[bins[k]] += values[k]
        bin_count[bins[k]] += 1.0
        wedge_sum[bins[k], wedges[k]] += values[k]

    total = float(values.sum())
    frac = np.zeros(RADIAL_BINS)
    mean_frac = np.zeros(RADIAL_BINS)
    cv = np.zeros(RADIAL_BINS)
    for b in range(RADIAL_BINS):
        if total > 0:
            frac[b] = bin_sum[b] / total
            if bin_count[b] > 0:
                mean_frac[b] = frac[b] / (bin_count[b] / n)
        wmean = wedge_sum[b].mean()
        if wmean > 0:
            wstd = math.sqrt(((wedge_sum[b] - wmean) ** 2).mean())
            cv[b] = wstd / wmean

    mags, phases = _zernike_direct(values, dx, dy, d_center, total)
    return np.concatenate([frac, mean_frac, cv, mags, phases])


def _zernike_direct(values, dx, dy, d_center, total) -> tuple[np.ndarray, np.ndarray]:
    count = len(ZERNIKE_INDICES)
    maxdist = float(d_center.max())
    if maxdist == 0.0 or total <= 0.0:
        return np.zeros(count), np.zeros(count)
    radius = maxdist + 1.0
    u = dx / radius
    v = dy / radius
    rho = np.sqrt(u**2 + v**2)
    angle = np.arctan2(v, u)
    phase_floor = _PHASE_REL_FLOOR / (math.pi * radius**2)
    mags = np.empty(count)
    phases = np.empty(count)
    for k, (nn, mm) in enumerate(ZERNIKE_INDICES):
        radial = np.zeros_like(rho)
        for s in range((nn - mm) // 2 + 1):
            coeff = (
                (-1.0) ** s
                * math.factorial(nn - s)
                / (
                    math.factorial(s)
                    * math.factorial((nn + mm) // 2 - s)
                    * math.factorial((nn - mm) // 2 - s)
                )
            )
            radial = radial + coeff * rho ** (nn - 2 * s)
        kernel = radial * np.exp(-1j * mm * angle)
        a = (nn + 1) / math.pi * complex((kernel * values).sum()) / radius**2
        mag = abs(a) / total
        mags[k] = mag
        if mm == 0 or mag < phase_floor:
            phases[k] = 0.0
        elif abs(a.imag) <= _REAL_AXIS_FLOOR * abs(a):
            # numerically real moment: pin to the axis instead of letting
            # noise pick a side of the +-pi branch cut
            phases[k] = 0.0 if a.real >= 0 else math.pi
        else:
            phases[k] = math.atan2(a.imag, a.real)
    return mags, phases


# ---------------------------------------------------------------------------
# queries and report

def oracle_query(regions: RegionSet, window: BoundingBox) -> list[int]:
    """Ground-truth window query: linear scan over all bounding boxes."""
    return sorted(o.object_id for o in regions if bbox_intersects(o.bbox, window))


@dataclass
class OracleReport:
    """Worst-case disagreement between two feature tables."""

    rtol: float
    atol: float
    feature_names: tuple[str, ...]
    max_abs_error: dict[str, float] = field(default_factory=dict)
    max_rel_error: dict[str, float] = field(default_factory=dict)
    offender: dict[str, int] = field(default_factory=dict)
    failed_features: tuple[str, ...] = ()
    mismatched_ids: bool = False

    @property
    def ok(self) -> bool:
        return not self.mismatched_ids and not self.failed_features

    def worst(self, limit: int = 10) -> list[dict]:
        ranked = sorted(
            self.feature_names,
            key=lambda name: self.max_rel_error.get(name, 0.0),
            reverse=True,
        )[:limit]
        return [
            {
                "feature": name,
                "max_abs_error": self.max_abs_error.get(name, 0.0),
                "max_rel_error": self.max_rel_error.get(name, 0.0),
                "object_id": self.offender.get(name, -1),
            }
            for name in ranked
        ]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "rtol": self.rtol,
            "atol": self.atol,
            "mismatched_ids": self.mismatched_ids,
            "failed_features": list(self.failed_features),
            "worst": self.worst(),
        }


def compare_tables(reference, candidate, rtol: float = 1e-6,
                   atol: float = 1e-9) -> OracleReport:
    """Per-feature worst-case errors of ``candidate`` against ``reference``.

    A row passes a feature when ``|cand - ref| <= atol`` or
    ``|cand - ref| <= rtol * |ref|``; a feature fails if any row violates
    both bounds.
    """
    report = OracleReport(rtol=rtol, atol=atol, feature_names=tuple(reference.feature_names))
    if reference.object_ids != candidate.object_ids or \
            reference.feature_names != candidate.feature_names:
        report.mismatched_ids = True
        return report
    ref = reference.matrix()
    cand = candidate.matrix()
    if len(ref) == 0:
        return report
    abs_err = np.abs(cand - ref)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel_err = np.where(ref != 0, abs_err / np.abs(ref), np.where(abs_err > 0, np.inf, 0.0))
    violation = (abs_err > atol) & (rel_err > rtol)
    ids = np.array(reference.object_ids)
    failed = []
    for j, name in enumerate(reference.feature_names):
        worst = int(np.argmax(abs_err[:, j]))
        report.max_abs_error[name] = float(abs_err[worst, j])
        report.max_rel_error[name] = float(rel_err[:, j].max())
        report.offender[name] = int(ids[worst])
        if violation[:, j].any():
            failed.append(name)
            report.offender[name] = int(ids[int(np.argmax(violation[:, j]))])
    report.failed_features = tuple(failed)
    return report
