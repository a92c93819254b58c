import numpy as np
import pytest

from pathex.model import BoundingBox, ObjectMask, ObjectRecord, RegionSet
from pathex.synthetic import generate_synthetic_slide


def disk_mask(radius: int) -> np.ndarray:
    size = 2 * radius + 1
    yy, xx = np.mgrid[0:size, 0:size]
    return (xx - float(radius)) ** 2 + (yy - float(radius)) ** 2 <= float(radius) ** 2


def random_blob(rng: np.random.Generator, size: int) -> np.ndarray:
    """Random connected-ish mask with occasional holes and spurs."""
    grid = rng.random((size, size)) < 0.55
    yy, xx = np.mgrid[0:size, 0:size]
    grid |= (xx - size / 2) ** 2 + (yy - size / 2) ** 2 <= (size / 3) ** 2
    if not grid.any():
        grid[size // 2, size // 2] = True
    return grid


def region_of(mask: np.ndarray, object_id: int = 1, at=(0, 0)) -> ObjectRecord:
    h, w = mask.shape
    x0, y0 = at
    return ObjectRecord(object_id, "unlabeled",
                        BoundingBox(x0, y0, x0 + w, y0 + h), ObjectMask(mask))


@pytest.fixture(scope="session")
def small_synthetic():
    return generate_synthetic_slide(seed=101, slide_size=(768, 768),
                                    n_objects=40, size_range=(3, 28))


@pytest.fixture(scope="session")
def mixed_synthetic():
    return generate_synthetic_slide(seed=202, slide_size=(1536, 1536),
                                    n_objects=120, size_range=(1, 64))
