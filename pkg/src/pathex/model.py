"""Core domain types: boxes, masks, object records, region sets, patches.

Conventions used everywhere downstream:

* Bounding boxes are half-open pixel rectangles: ``min`` edges inclusive,
  ``max`` edges exclusive, so ``width = max_x - min_x``.
* Coordinates are integer pixels in slide space at a single resolution level.
* Masks and patches are row-major ``(height, width)`` numpy arrays local to
  the owning bounding box; arrays are frozen after construction so instances
  can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Half-open pixel rectangle in slide coordinates."""

    min_x: int
    min_y: int
    max_x: int
    max_y: int

    def __post_init__(self):
        if self.max_x <= self.min_x or self.max_y <= self.min_y:
            raise ValueError(f"bounding box has non-positive extent: {self}")

    @property
    def width(self) -> int:
        return self.max_x - self.min_x

    @property
    def height(self) -> int:
        return self.max_y - self.min_y

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains_box(self, other: "BoundingBox") -> bool:
        return (
            self.min_x <= other.min_x
            and self.min_y <= other.min_y
            and self.max_x >= other.max_x
            and self.max_y >= other.max_y
        )

    def contains_point(self, x: int, y: int) -> bool:
        return self.min_x <= x < self.max_x and self.min_y <= y < self.max_y


def bbox_intersects(a: BoundingBox, b: BoundingBox) -> bool:
    """True iff the half-open rectangles share at least one pixel."""
    return a.min_x < b.max_x and b.min_x < a.max_x and a.min_y < b.max_y and b.min_y < a.max_y


def bbox_union(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Smallest box containing both inputs."""
    return BoundingBox(
        min(a.min_x, b.min_x),
        min(a.min_y, b.min_y),
        max(a.max_x, b.max_x),
        max(a.max_y, b.max_y),
    )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ObjectMask:
    """Binary occupancy grid local to an object's bounding box.

    ``bits`` is a boolean ``(height, width)`` array with at least one set
    pixel; dimensions must equal the owning box's height and width.
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("mask must be a 2-D raster")
        if not bits.any():
            raise ValueError("mask has no set pixels")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


def mask_area(mask: ObjectMask) -> int:
    """Number of set pixels."""
    return int(np.count_nonzero(mask.bits))


@dataclass(frozen=True)
class IntensityPatch:
    """Grayscale pixel crop for one bounding box, normalized to [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("patch must be a 2-D raster")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("patch intensities must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ObjectRecord:
    """One annotated object: id, class tag, box, and local mask."""

    object_id: int
    class_label: str
    bbox: BoundingBox
    mask: ObjectMask

    def __post_init__(self):
        if self.object_id < 0:
            raise ValueError("object_id must be non-negative")
        if (self.mask.height, self.mask.width) != (self.bbox.height, self.bbox.width):
            raise ShapeError(
                f"object {self.object_id}: mask {self.mask.height}x{self.mask.width} "
                f"does not match bbox {self.bbox.height}x{self.bbox.width}"
            )


@dataclass(frozen=True)
class RegionSet:
    """All annotated objects of one slide, in canonical object_id order."""

    slide_width: int
    slide_height: int
    objects: tuple[ObjectRecord, ...]
    source_id: str = ""
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        objects = tuple(self.objects)
        ids = [o.object_id for o in objects]
        if sorted(ids) != ids:
            objects = tuple(sorted(objects, key=lambda o: o.object_id))
            ids = [o.object_id for o in objects]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate object_id in region set")
        bounds = BoundingBox(0, 0, max(self.slide_width, 1), max(self.slide_height, 1))
        for obj in objects:
            if not bounds.contains_box(obj.bbox):
                raise ValueError(
                    f"object {obj.object_id} bbox {obj.bbox} exceeds slide "
                    f"{self.slide_width}x{self.slide_height}"
                )
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "_by_id", {o.object_id: o for o in objects})

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self) -> Iterator[ObjectRecord]:
        return iter(self.objects)

    def get(self, object_id: int) -> ObjectRecord:
        return self._by_id[object_id]

    @property
    def object_ids(self) -> tuple[int, ...]:
        return tuple(o.object_id for o in self.objects)
