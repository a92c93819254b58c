"""Label-mask ingestion: integer rasters where each value is one object.

Label identity, not connectivity, defines objects here: a label split into
two blobs still yields one record. ``connected_components`` is the
companion path for plain binary masks.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from . import tiffio
from .errors import EmptyRegionSet, ParseError
from .model import BoundingBox, ObjectMask, ObjectRecord, RegionSet

_STRUCTURES = {
    4: np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool),
    8: np.ones((3, 3), dtype=bool),
}


def load_label_array(path) -> np.ndarray:
    """Read a single-channel integer raster from TIFF or PNG."""
    suffix = Path(path).suffix.lower()
    if suffix in (".tif", ".tiff"):
        with tiffio.TiffReader(path) as reader:
            arr = reader.read_full()
    else:
        with Image.open(path) as img:
            if img.mode == "I;16":
                arr = np.asarray(img, dtype=np.uint16)
            elif img.mode == "I":
                arr = np.asarray(img, dtype=np.int64)
            elif img.mode in ("L", "P"):
                arr = np.asarray(img.convert("L"))
            else:
                raise ParseError(f"{path}: mode {img.mode} is not an integer raster")
    if arr.ndim != 2:
        raise ParseError(f"{path}: label raster must be single-channel")
    if arr.min() < 0:
        raise ParseError(f"{path}: negative label values")
    return arr.astype(np.int64)


def _record_for(raster: np.ndarray, label: int, rows: slice, cols: slice,
                class_label: str) -> ObjectRecord:
    crop = raster[rows, cols] == label
    bbox = BoundingBox(cols.start, rows.start, cols.stop, rows.stop)
    return ObjectRecord(int(label), class_label, bbox, ObjectMask(crop))


def load_label_mask(raster: np.ndarray, class_map: dict | None = None,
                    source_id: str = "label-mask") -> RegionSet:
    """One ObjectRecord per distinct nonzero label value."""
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ParseError("label raster must be 2-D")
    labels = np.unique(raster)
    labels = labels[labels > 0]
    if labels.size == 0:
        raise EmptyRegionSet("label raster has no nonzero labels")
    class_map = {int(k): str(v) for k, v in (class_map or {}).items()}

    # find_objects wants dense labels; remap before slicing.
    dense = np.searchsorted(labels, raster)
    dense[raster == 0] = -1
    slices = ndimage.find_objects(dense + 1)
    records = []
    for i, label in enumerate(labels.tolist()):
        rows, cols = slices[i]
        records.append(
            _record_for(raster, label, rows, cols, class_map.get(label, "unlabeled"))
        )
    height, width = raster.shape
    return RegionSet(width, height, tuple(records), source_id=source_id)


def connected_components(binary: np.ndarray, connectivity: int = 8) -> RegionSet:
    """Objects from a binary raster, numbered 1..K in raster-scan order."""
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    binary = np.asarray(binary).astype(bool)
    height, width = binary.shape
    labeled, count = ndimage.label(binary, structure=_STRUCTURES[connectivity])
    if count == 0:
        return RegionSet(width, height, (), source_id="connected-components")

    # Renumber so object k is the k-th component encountered in raster scan.
    flat = labeled.ravel()
    first_pixel = np.full(count + 1, flat.size, dtype=np.int64)
    nz = np.flatnonzero(flat)
    # reversed so the earliest index wins the assignment
    first_pixel[flat[nz[::-1]]] = nz[::-1]
    order = np.argsort(first_pixel[1:], kind="stable")
    remap = np.zeros(count + 1, dtype=np.int64)
    remap[1 + order] = np.arange(1, count + 1)
    relabeled = remap[labeled]

    slices = ndimage.find_objects(relabeled)
    records = []
    for k in range(1, count + 1):
        rows, cols = slices[k - 1]
        records.append(_record_for(relabeled, k, rows, cols, "unlabeled"))
    return RegionSet(width, height, tuple(records), source_id="connected-components")


def paint_labels(regions: RegionSet) -> np.ndarray:
    """Render a RegionSet back into a label raster (inverse of ingestion)."""
    dtype = np.uint16 if (len(regions) == 0 or max(regions.object_ids) < 65536) else np.uint32
    out = np.zeros((regions.slide_height, regions.slide_width), dtype=dtype)
    for obj in regions:
        view = out[obj.bbox.min_y : obj.bbox.max_y, obj.bbox.min_x : obj.bbox.max_x]
        view[obj.mask.bits] = obj.object_id
    return out
