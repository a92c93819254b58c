"""Texture family: 13 co-occurrence statistics x 4 angles x 2 scales."""

from __future__ import annotations

import numpy as np

from ..manifest import TEXTURE_ANGLES, TEXTURE_SCALES
from . import common


def glcm(levels: np.ndarray, mask: np.ndarray, scale: int, angle: int) -> np.ndarray | None:
    """Normalized symmetric co-occurrence matrix, or None when no pair exists."""
    counts = common.glcm_counts(levels, mask, scale, angle)
    total = counts.sum()
    if total == 0:
        return None
    return counts / float(total)


def texture_features(patch: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """104 values, scale-major, angle-minor, statistic-innermost.

    Degenerate (scale, angle) combinations — no in-mask pixel pair at that
    offset — contribute zeros.
    """
    mask = np.asarray(mask, dtype=bool)
    levels = common.quantize8(np.asarray(patch, dtype=np.float64), mask)
    matrices = []
    valid = []
    for scale in TEXTURE_SCALES:
        for angle in TEXTURE_ANGLES:
            p = glcm(levels, mask, scale, angle)
            if p is None:
                matrices.append(np.zeros((common.GLCM_LEVELS, common.GLCM_LEVELS)))
                valid.append(False)
            else:
                matrices.append(p)
                valid.append(True)
    stats = common.haralick_stats(np.stack(matrices), np.array(valid))
    return stats.reshape(-1)
