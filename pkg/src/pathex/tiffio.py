"""Minimal baseline-TIFF reader and writer with windowed access.

Supports the subset this package needs at desk scale: classic (non-Big)
TIFF, chunky planar layout, grayscale 8/16/32-bit unsigned and 8-bit RGB,
striped or tiled organization, compression none (1) or zlib deflate
(8 / 32946). Windowed reads decode only the strips or tiles that intersect
the requested rectangle, which is what makes tiled slides usable without a
whole-image decode. LZW, JPEG, predictors, and planar-separate layouts are
out of scope; readers raise ``ParseError`` for them.
"""

from __future__ import annotations

import struct
import threading
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ParseError

_TYPE_SIZES = {1: 1, 2: 1, 3: 2, 4: 4, 5: 8, 6: 1, 7: 1, 8: 2, 9: 4, 10: 8, 11: 4, 12: 8}
_TYPE_CODES = {1: "B", 3: "H", 4: "I", 8: "h", 9: "i", 11: "f", 12: "d"}

TAG_WIDTH = 256
TAG_LENGTH = 257
TAG_BITS = 258
TAG_COMPRESSION = 259
TAG_PHOTOMETRIC = 262
TAG_STRIP_OFFSETS = 273
TAG_SPP = 277
TAG_ROWS_PER_STRIP = 278
TAG_STRIP_COUNTS = 279
TAG_PLANAR = 284
TAG_PREDICTOR = 317
TAG_TILE_WIDTH = 322
TAG_TILE_LENGTH = 323
TAG_TILE_OFFSETS = 324
TAG_TILE_COUNTS = 325
TAG_SAMPLE_FORMAT = 339


@dataclass
class _Ifd:
    width: int
    height: int
    bits: int
    spp: int
    compression: int
    tiled: bool
    tile_width: int
    tile_height: int
    rows_per_strip: int
    offsets: list[int]
    counts: list[int]


_SEGMENT_CACHE_SLOTS = 512


class TiffReader:
    """Windowed access to one TIFF image (first IFD only).

    Decoded segments are kept in a small FIFO cache: neighboring windows
    usually hit the same tiles, and re-inflating them dominates otherwise.
    """

    def __init__(self, path):
        self._path = str(path)
        self._fh = open(self._path, "rb")
        self._lock = threading.Lock()
        self._cache: dict[int, np.ndarray] = {}
        header = self._fh.read(8)
        if len(header) < 8 or header[:2] not in (b"II", b"MM"):
            raise ParseError(f"{self._path}: not a TIFF file")
        self._bo = "<" if header[:2] == b"II" else ">"
        magic, ifd_offset = struct.unpack(self._bo + "HI", header[2:8])
        if magic != 42:
            raise ParseError(f"{self._path}: bad TIFF magic {magic}")
        self._ifd = self._parse_ifd(ifd_offset)

    # -- metadata ---------------------------------------------------------

    @property
    def width(self) -> int:
        return self._ifd.width

    @property
    def height(self) -> int:
        return self._ifd.height

    @property
    def samples_per_pixel(self) -> int:
        return self._ifd.spp

    @property
    def dtype(self) -> np.dtype:
        return np.dtype({8: np.uint8, 16: np.uint16, 32: np.uint32}[self._ifd.bits])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- parsing ----------------------------------------------------------

    def _read_at(self, offset: int, size: int) -> bytes:
        with self._lock:
            self._fh.seek(offset)
            return self._fh.read(size)

    def _parse_ifd(self, offset: int) -> _Ifd:
        (count,) = struct.unpack(self._bo + "H", self._read_at(offset, 2))
        raw = self._read_at(offset + 2, count * 12)
        tags: dict[int, list[int]] = {}
        for i in range(count):
            tag, typ, n = struct.unpack(self._bo + "HHI", raw[i * 12 : i * 12 + 8])
            if typ not in _TYPE_CODES:
                continue
            size = _TYPE_SIZES[typ] * n
            if size <= 4:
                payload = raw[i * 12 + 8 : i * 12 + 8 + size]
            else:
                (value_offset,) = struct.unpack(self._bo + "I", raw[i * 12 + 8 : i * 12 + 12])
                payload = self._read_at(value_offset, size)
            tags[tag] = list(struct.unpack(self._bo + str(n) + _TYPE_CODES[typ], payload))

        def one(tag, default=None):
            if tag in tags:
                return tags[tag][0]
            if default is None:
                raise ParseError(f"{self._path}: missing required TIFF tag {tag}")
            return default

        width, height = one(TAG_WIDTH), one(TAG_LENGTH)
        spp = one(TAG_SPP, 1)
        bits_list = tags.get(TAG_BITS, [8])
        if len(set(bits_list)) != 1:
            raise ParseError(f"{self._path}: mixed bits per sample {bits_list}")
        bits = bits_list[0]
        if bits not in (8, 16, 32):
            raise ParseError(f"{self._path}: unsupported bit depth {bits}")
        compression = one(TAG_COMPRESSION, 1)
        if compression not in (1, 8, 32946):
            raise ParseError(f"{self._path}: unsupported compression {compression}")
        if one(TAG_PLANAR, 1) != 1:
            raise ParseError(f"{self._path}: planar-separate layout unsupported")
        if one(TAG_PREDICTOR, 1) != 1:
            raise ParseError(f"{self._path}: TIFF predictor unsupported")
        sample_format = one(TAG_SAMPLE_FORMAT, 1)
        if sample_format != 1:
            raise ParseError(f"{self._path}: non-unsigned sample format unsupported")

        tiled = TAG_TILE_OFFSETS in tags
        if tiled:
            return _Ifd(
                width, height, bits, spp, compression, True,
                one(TAG_TILE_WIDTH), one(TAG_TILE_LENGTH), 0,
                tags[TAG_TILE_OFFSETS], tags[TAG_TILE_COUNTS],
            )
        if TAG_STRIP_OFFSETS not in tags:
            raise ParseError(f"{self._path}: neither strips nor tiles present")
        return _Ifd(
            width, height, bits, spp, compression, False, 0, 0,
            one(TAG_ROWS_PER_STRIP, height),
            tags[TAG_STRIP_OFFSETS], tags.get(TAG_STRIP_COUNTS, []),
        )

    # -- decoding ---------------------------------------------------------

    def _segment(self, index: int, shape: tuple[int, ...]) -> np.ndarray:
        with self._lock:
            cached = self._cache.get(index)
        if cached is not None:
            return cached
        ifd = self._ifd
        if ifd.counts:
            raw = self._read_at(ifd.offsets[index], ifd.counts[index])
        else:
            raw = self._read_at(ifd.offsets[index], int(np.prod(shape)) * (ifd.bits // 8))
        if ifd.compression != 1:
            raw = zlib.decompress(raw)
        arr = np.frombuffer(raw, dtype=self.dtype.newbyteorder(self._bo))
        expected = int(np.prod(shape))
        if arr.size < expected:
            raise ParseError(f"{self._path}: segment {index} truncated")
        decoded = arr[:expected].reshape(shape).astype(self.dtype)
        decoded.flags.writeable = False
        with self._lock:
            if len(self._cache) >= _SEGMENT_CACHE_SLOTS:
                self._cache.pop(next(iter(self._cache)))
            self._cache[index] = decoded
        return decoded

    def read_window(self, x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
        """Decode the half-open window [x0,x1) x [y0,y1).

        Returns an array of shape (y1-y0, x1-x0) for grayscale or
        (..., samples) for multi-sample images. Only intersecting segments
        are decoded.
        """
        ifd = self._ifd
        if not (0 <= x0 < x1 <= ifd.width and 0 <= y0 < y1 <= ifd.height):
            raise BoundsError(
                f"window ({x0},{y0},{x1},{y1}) outside slide {ifd.width}x{ifd.height}"
            )
        out = np.zeros((y1 - y0, x1 - x0, ifd.spp), dtype=self.dtype)
        if ifd.tiled:
            tw, th = ifd.tile_width, ifd.tile_height
            across = (ifd.width + tw - 1) // tw
            for ty in range(y0 // th, (y1 - 1) // th + 1):
                for tx in range(x0 // tw, (x1 - 1) // tw + 1):
                    tile = self._segment(ty * across + tx, (th, tw, ifd.spp))
                    ox, oy = tx * tw, ty * th
                    sx0, sy0 = max(x0, ox), max(y0, oy)
                    sx1, sy1 = min(x1, ox + tw), min(y1, oy + th)
                    out[sy0 - y0 : sy1 - y0, sx0 - x0 : sx1 - x0] = tile[
                        sy0 - oy : sy1 - oy, sx0 - ox : sx1 - ox
                    ]
        else:
            rps = ifd.rows_per_strip
            for si in range(y0 // rps, (y1 - 1) // rps + 1):
                rows = min(rps, ifd.height - si * rps)
                strip = self._segment(si, (rows, ifd.width, ifd.spp))
                oy = si * rps
                sy0, sy1 = max(y0, oy), min(y1, oy + rows)
                out[sy0 - y0 : sy1 - y0, :] = strip[sy0 - oy : sy1 - oy, x0:x1]
        return out[:, :, 0] if ifd.spp == 1 else out

    def read_full(self) -> np.ndarray:
        return self.read_window(0, 0, self._ifd.width, self._ifd.height)


def write_tiff(path, image: np.ndarray, tile_size: int | None = 256, compress: bool = True):
    """Write a grayscale or RGB array as a classic little-endian TIFF.

    ``tile_size`` of None writes one strip per 64 rows; otherwise square
    tiles of the given edge. Output bytes are deterministic for identical
    input.
    """
    image = np.asarray(image)
    if image.ndim == 2:
        spp = 1
        image = image[:, :, None]
    elif image.ndim == 3 and image.shape[2] == 3:
        spp = 3
    else:
        raise ValueError(f"expected (H,W) or (H,W,3) image, got {image.shape}")
    if image.dtype not in (np.uint8, np.uint16, np.uint32):
        raise ValueError(f"unsupported dtype {image.dtype}")
    if spp == 3 and image.dtype != np.uint8:
        raise ValueError("RGB output must be 8-bit")
    height, width = image.shape[:2]
    bits = image.dtype.itemsize * 8
    photometric = 2 if spp == 3 else 1

    segments: list[bytes] = []
    if tile_size:
        tw = th = int(tile_size)
        for ty in range(0, height, th):
            for tx in range(0, width, tw):
                tile = np.zeros((th, tw, spp), dtype=image.dtype)
                block = image[ty : ty + th, tx : tx + tw]
                tile[: block.shape[0], : block.shape[1]] = block
                segments.append(tile.tobytes())
    else:
        rps = min(64, height)
        for sy in range(0, height, rps):
            segments.append(image[sy : sy + rps].tobytes())
    if compress:
        segments = [zlib.compress(s, 6) for s in segments]

    header_size = 8
    data_start = header_size
    seg_offsets = []
    pos = data_start
    for seg in segments:
        seg_offsets.append(pos)
        pos += len(seg)

    # Out-of-line tag arrays follow the pixel data.
    extra: list[bytes] = []

    def defer(fmt: str, values) -> int:
        nonlocal pos
        blob = struct.pack("<" + fmt * len(values), *values)
        extra.append(blob)
        off = pos
        pos += len(blob)
        return off

    entries: list[tuple[int, int, int, int]] = []  # tag, type, count, value

    def add(tag, typ, values):
        values = list(values)
        size = _TYPE_SIZES[typ] * len(values)
        if size <= 4:
            blob = struct.pack("<" + _TYPE_CODES[typ] * len(values), *values)
            (value,) = struct.unpack("<I", blob.ljust(4, b"\0"))
            entries.append((tag, typ, len(values), value))
        else:
            entries.append((tag, typ, len(values), defer(_TYPE_CODES[typ], values)))

    add(TAG_WIDTH, 4, [width])
    add(TAG_LENGTH, 4, [height])
    add(TAG_BITS, 3, [bits] * spp)
    add(TAG_COMPRESSION, 3, [8 if compress else 1])
    add(TAG_PHOTOMETRIC, 3, [photometric])
    add(TAG_SPP, 3, [spp])
    add(TAG_SAMPLE_FORMAT, 3, [1] * spp)
    if tile_size:
        add(TAG_TILE_WIDTH, 4, [tile_size])
        add(TAG_TILE_LENGTH, 4, [tile_size])
        add(TAG_TILE_OFFSETS, 4, seg_offsets)
        add(TAG_TILE_COUNTS, 4, [len(s) for s in segments])
    else:
        add(TAG_STRIP_OFFSETS, 4, seg_offsets)
        add(TAG_ROWS_PER_STRIP, 4, [min(64, height)])
        add(TAG_STRIP_COUNTS, 4, [len(s) for s in segments])
    add(TAG_PLANAR, 3, [1])
    entries.sort()

    ifd_offset = pos
    with open(path, "wb") as fh:
        fh.write(struct.pack("<2sHI", b"II", 42, ifd_offset))
        for seg in segments:
            fh.write(seg)
        for blob in extra:
            fh.write(blob)
        fh.write(struct.pack("<H", len(entries)))
        for tag, typ, count, value in entries:
            fh.write(struct.pack("<HHII", tag, typ, count, value))
        fh.write(struct.pack("<I", 0))
