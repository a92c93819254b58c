"""Slide pixel sources with windowed reads.

A slide source exposes ``width``, ``height``, and ``read_window``; windows
come back as float64 grayscale in [0, 1] regardless of the backing bit
depth. RGB sources are collapsed to luminance (0.2126, 0.7152, 0.0722) at
read time. TIFF slides decode only the segments a window touches; PNG (and
anything else Pillow opens) is decoded once and windowed from memory, which
is fine at desk scale.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from . import tiffio
from .errors import BoundsError, ParseError
from .model import BoundingBox, IntensityPatch

_LUMA = (0.2126, 0.7152, 0.0722)


def _normalize(raw: np.ndarray) -> np.ndarray:
    """Map integer samples to float64 [0,1]; collapse RGB to luminance."""
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    elif raw.dtype == np.uint32:
        scale = 4294967295.0
    elif np.issubdtype(raw.dtype, np.floating):
        scale = 1.0
    else:
        raise ParseError(f"unsupported sample dtype {raw.dtype}")
    if raw.ndim == 3:
        if raw.shape[2] < 3:
            raw = raw[:, :, 0]
            gray = raw.astype(np.float64) / scale
        else:
            r = raw[:, :, 0].astype(np.float64)
            g = raw[:, :, 1].astype(np.float64)
            b = raw[:, :, 2].astype(np.float64)
            gray = (_LUMA[0] * r + _LUMA[1] * g + _LUMA[2] * b) / scale
    else:
        gray = raw.astype(np.float64) / scale
    return np.clip(gray, 0.0, 1.0)


class SlideSource:
    """Windowed access to slide pixels. Subclasses fill in ``_read_raw``."""

    width: int
    height: int

    def _read_raw(self, x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
        raise NotImplementedError

    def read_window(self, bbox: BoundingBox) -> np.ndarray:
        """Grayscale [0,1] crop of exactly ``bbox`` dimensions."""
        if not (0 <= bbox.min_x and 0 <= bbox.min_y
                and bbox.max_x <= self.width and bbox.max_y <= self.height):
            raise BoundsError(
                f"window {bbox} outside slide {self.width}x{self.height}"
            )
        return _normalize(self._read_raw(bbox.min_x, bbox.min_y, bbox.max_x, bbox.max_y))


class ArraySlide(SlideSource):
    """In-memory slide over a numpy array (grayscale or RGB)."""

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels)
        if pixels.ndim not in (2, 3):
            raise ValueError(f"expected 2-D or 3-D pixel array, got {pixels.shape}")
        self._pixels = pixels
        self.height, self.width = pixels.shape[:2]

    def _read_raw(self, x0, y0, x1, y1):
        return self._pixels[y0:y1, x0:x1]


class TiffSlide(SlideSource):
    """TIFF-backed slide; windowed reads decode only intersecting segments."""

    def __init__(self, path):
        self._reader = tiffio.TiffReader(path)
        self.width = self._reader.width
        self.height = self._reader.height

    def _read_raw(self, x0, y0, x1, y1):
        return self._reader.read_window(x0, y0, x1, y1)

    def close(self):
        self._reader.close()


class PillowSlide(SlideSource):
    """Slide decoded eagerly via Pillow (PNG and friends)."""

    def __init__(self, path):
        with Image.open(path) as img:
            if img.mode == "I;16":
                pixels = np.asarray(img, dtype=np.uint16)
            elif img.mode == "I":
                pixels = np.asarray(img, dtype=np.int64)
                if pixels.min() < 0 or pixels.max() > 0xFFFFFFFF:
                    raise ParseError(f"{path}: integer PNG out of uint32 range")
                pixels = pixels.astype(np.uint32)
            elif img.mode in ("L", "RGB"):
                pixels = np.asarray(img)
            else:
                pixels = np.asarray(img.convert("RGB"))
        self._pixels = pixels
        self.height, self.width = pixels.shape[:2]

    def _read_raw(self, x0, y0, x1, y1):
        return self._pixels[y0:y1, x0:x1]


def open_slide(path) -> SlideSource:
    """Open a slide file by format: TIFF gets windowed reads, rest Pillow."""
    suffix = Path(path).suffix.lower()
    if suffix in (".tif", ".tiff"):
        return TiffSlide(path)
    return PillowSlide(path)


def read_patch(slide: SlideSource, bbox: BoundingBox) -> IntensityPatch:
    """Read one object's bounding-box crop as an IntensityPatch."""
    return IntensityPatch(slide.read_window(bbox))
