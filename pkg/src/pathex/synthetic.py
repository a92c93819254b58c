"""Deterministic synthetic slides for testing and benchmarking.

Generates non-overlapping objects (ellipses, rectangles, blobs, rings,
lines, single pixels) with per-object intensity textures (constant, ramp,
radial Gaussian, seeded noise), then emits the same ground truth three
ways: rendered slide pixels, an integer label mask, and GeoJSON polygons
traced along the pixel cracks — so both ingestion paths can be exercised
on identical objects. Everything is a pure function of the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from . import tiffio
from .errors import PackingError
from .geojson import Annotation, AnnotationSet
from .model import BoundingBox, ObjectMask, ObjectRecord, RegionSet
from .rings import signed_area, trace_boundaries
from .slide import ArraySlide

SHAPE_KINDS = ("ellipse", "rect", "blob", "ring", "line", "point")
INTENSITY_MODELS = ("constant", "ramp", "gaussian", "noise")
CLASS_POOL = ("epithelioid", "vessel", "tubule")

_BACKGROUND = 235
_FOREGROUND_LO = 40
_FOREGROUND_HI = 220


@dataclass(frozen=True)
class SyntheticSlide:
    pixels: np.ndarray           # (H, W) uint8
    regions: RegionSet
    annotations: AnnotationSet
    labels: np.ndarray           # (H, W) uint16/uint32
    class_map: dict[int, str]

    @property
    def slide(self) -> ArraySlide:
        return ArraySlide(self.pixels)

    def write_dir(self, out_dir) -> dict[str, str]:
        """Write slide.tiff, labels.png, annotations.geojson, classes.json."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "slide": str(out / "slide.tiff"),
            "labels": str(out / "labels.png"),
            "annotations": str(out / "annotations.geojson"),
            "classes": str(out / "classes.json"),
        }
        tiffio.write_tiff(paths["slide"], self.pixels, tile_size=256, compress=True)
        if self.labels.dtype == np.uint16:
            Image.fromarray(self.labels).save(paths["labels"])
        else:
            Image.fromarray(self.labels.astype(np.int32)).save(paths["labels"])
        with open(paths["annotations"], "w", encoding="utf-8") as fh:
            json.dump(annotations_to_geojson(self.annotations), fh,
                      separators=(",", ":"), sort_keys=True)
        with open(paths["classes"], "w", encoding="utf-8") as fh:
            json.dump({str(k): v for k, v in sorted(self.class_map.items())}, fh,
                      separators=(",", ":"), sort_keys=True)
        return paths


def annotations_to_geojson(annotations: AnnotationSet) -> dict:
    features = []
    for ann in annotations:
        rings = [[[int(x), int(y)] for x, y in ann.outer_ring]]
        rings += [[[int(x), int(y)] for x, y in hole] for hole in ann.holes]
        features.append({
            "type": "Feature",
            "id": ann.annotation_id,
            "geometry": {"type": "Polygon", "coordinates": rings},
            "properties": {"classification": {"name": ann.class_label}},
        })
    return {"type": "FeatureCollection", "features": features}


# ---------------------------------------------------------------------------
# mask synthesis

def _ellipse_mask(w: int, h: int) -> np.ndarray:
    xs = (np.arange(w) + 0.5 - w / 2.0) / (w / 2.0)
    ys = (np.arange(h) + 0.5 - h / 2.0) / (h / 2.0)
    return (xs[None, :] ** 2 + ys[:, None] ** 2) <= 1.0


def _blob_mask(w: int, h: int, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros((h, w), dtype=bool)
    lobes = int(rng.integers(2, 5))
    for _ in range(lobes):
        lw = int(rng.integers(max(1, w // 3), w + 1))
        lh = int(rng.integers(max(1, h // 3), h + 1))
        ox = int(rng.integers(0, w - lw + 1)) if w > lw else 0
        oy = int(rng.integers(0, h - lh + 1)) if h > lh else 0
        mask[oy : oy + lh, ox : ox + lw] |= _ellipse_mask(lw, lh)
    return mask


def _ring_mask(w: int, h: int) -> np.ndarray:
    outer = _ellipse_mask(w, h)
    iw, ih = max(1, w // 2), max(1, h // 2)
    inner = np.zeros((h, w), dtype=bool)
    oy, ox = (h - ih) // 2, (w - iw) // 2
    inner[oy : oy + ih, ox : ox + iw] = _ellipse_mask(iw, ih)
    ring = outer & ~inner
    return ring if ring.any() else outer


_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep the largest 4-connected part so the crack outline is one ring."""
    labeled, count = ndimage.label(mask, structure=_FOUR)
    if count <= 1:
        return mask
    sizes = np.bincount(labeled.ravel())[1:]
    return labeled == (int(np.argmax(sizes)) + 1)


def _make_mask(kind: str, w: int, h: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "ellipse":
        mask = _ellipse_mask(w, h)
    elif kind == "rect":
        mask = np.ones((h, w), dtype=bool)
    elif kind == "blob":
        mask = _blob_mask(w, h, rng)
    elif kind == "ring":
        mask = _ring_mask(w, h)
    elif kind == "line":
        mask = np.ones((1, max(w, h)), dtype=bool) if rng.random() < 0.5 \
            else np.ones((max(w, h), 1), dtype=bool)
    elif kind == "point":
        mask = np.ones((1, 1), dtype=bool)
    else:
        raise ValueError(f"unknown shape kind {kind!r}")
    mask = _largest_component(mask)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]


def _paint_intensity(model: str, mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """uint8 values for the masked pixels (row-major over the mask)."""
    h, w = mask.shape
    n = int(mask.sum())
    span = _FOREGROUND_HI - _FOREGROUND_LO
    if model == "constant":
        return np.full(n, int(rng.integers(_FOREGROUND_LO, _FOREGROUND_HI + 1)), dtype=np.uint8)
    ys, xs = np.nonzero(mask)
    if model == "ramp":
        axis = xs if rng.random() < 0.5 else ys
        extent = max(int(axis.max()) - int(axis.min()), 1)
        t = (axis - axis.min()) / extent
        return (_FOREGROUND_LO + t * span).astype(np.uint8)
    if model == "gaussian":
        cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
        sigma = max(max(w, h) / 4.0, 1.0)
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        t = np.exp(-d2 / (2.0 * sigma**2))
        return (_FOREGROUND_LO + t * span).astype(np.uint8)
    if model == "noise":
        return rng.integers(_FOREGROUND_LO, _FOREGROUND_HI + 1, size=n).astype(np.uint8)
    raise ValueError(f"unknown intensity model {model!r}")


# ---------------------------------------------------------------------------
# generation

def generate_synthetic_slide(
    seed: int,
    slide_size: tuple[int, int] = (2048, 2048),
    n_objects: int = 100,
    size_range: tuple[int, int] = (8, 32),
    shape_mix: tuple[str, ...] = SHAPE_KINDS,
    intensity_models: tuple[str, ...] = INTENSITY_MODELS,
    max_tries: int = 200,
) -> SyntheticSlide:
    """Deterministically generate a slide, labels, and annotations.

    Bounding boxes never overlap (1 px of clearance); placement failure
    after ``max_tries`` rejections per object raises PackingError.
    """
    width, height = slide_size
    lo, hi = size_range
    if not (1 <= lo <= hi):
        raise ValueError(f"bad size range {size_range}")
    rng = np.random.Generator(np.random.PCG64(seed))

    pixels = np.full((height, width), _BACKGROUND, dtype=np.uint8)
    labels = np.zeros((height, width),
                      dtype=np.uint16 if n_objects < 65536 else np.uint32)
    occupied = np.zeros((height, width), dtype=bool)

    records = []
    annotations = []
    class_map: dict[int, str] = {}
    for oid in range(1, n_objects + 1):
        kind = shape_mix[int(rng.integers(0, len(shape_mix)))]
        model = intensity_models[int(rng.integers(0, len(intensity_models)))]
        w = int(rng.integers(lo, hi + 1))
        h = int(rng.integers(lo, hi + 1))
        mask = _make_mask(kind, w, h, rng)
        mh, mw = mask.shape
        if mw > width or mh > height:
            raise PackingError(f"object {oid} ({mw}x{mh}) exceeds the slide")

        placed = False
        for _ in range(max_tries):
            x0 = int(rng.integers(0, width - mw + 1))
            y0 = int(rng.integers(0, height - mh + 1))
            ry0, ry1 = max(0, y0 - 1), min(height, y0 + mh + 1)
            rx0, rx1 = max(0, x0 - 1), min(width, x0 + mw + 1)
            if occupied[ry0:ry1, rx0:rx1].any():
                continue
            placed = True
            break
        if not placed:
            raise PackingError(
                f"could not place object {oid} of {n_objects} "
                f"({mw}x{mh}) after {max_tries} tries"
            )

        occupied[y0 : y0 + mh, x0 : x0 + mw] = True
        values = _paint_intensity(model, mask, rng)
        region = pixels[y0 : y0 + mh, x0 : x0 + mw]
        region[mask] = values
        labels[y0 : y0 + mh, x0 : x0 + mw][mask] = oid

        label_name = CLASS_POOL[int(rng.integers(0, len(CLASS_POOL)))]
        class_map[oid] = label_name
        bbox = BoundingBox(x0, y0, x0 + mw, y0 + mh)
        records.append(ObjectRecord(oid, label_name, bbox, ObjectMask(mask)))

        rings = trace_boundaries(mask)
        shifted = [[(x + x0, y + y0) for x, y in ring] for ring in rings]
        outers = [r for r in shifted if signed_area(r) > 0]
        holes = [r for r in shifted if signed_area(r) <= 0]
        if len(outers) != 1:
            raise PackingError(f"object {oid}: outline is not a single ring")
        annotations.append(
            Annotation(f"synthetic-{oid}", label_name, outers[0], holes,
                       {"classification": {"name": label_name}}, object_id=oid)
        )

    regions = RegionSet(width, height, tuple(records), source_id=f"synthetic-{seed}")
    return SyntheticSlide(pixels, regions, AnnotationSet(tuple(annotations)),
                          labels, class_map)
