"""TIFF codec round-trips and windowed-read correctness."""

import numpy as np
import pytest
from PIL import Image

from pathex import tiffio
from pathex.errors import BoundsError, ParseError


def _random_image(rng, shape, dtype):
    if dtype == np.uint8:
        return rng.integers(0, 256, size=shape).astype(np.uint8)
    if dtype == np.uint16:
        return rng.integers(0, 65536, size=shape).astype(np.uint16)
    return rng.integers(0, 2**31, size=shape).astype(np.uint32)


@pytest.mark.parametrize("dtype", [np.uint8, np.uint16, np.uint32])
@pytest.mark.parametrize("tile_size,compress", [(None, False), (None, True),
                                                (64, False), (64, True)])
def test_gray_roundtrip(tmp_path, dtype, tile_size, compress):
    rng = np.random.default_rng(3)
    img = _random_image(rng, (150, 201), dtype)
    path = tmp_path / "t.tiff"
    tiffio.write_tiff(path, img, tile_size=tile_size, compress=compress)
    with tiffio.TiffReader(path) as reader:
        assert (reader.width, reader.height) == (201, 150)
        assert np.array_equal(reader.read_full(), img)


def test_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, size=(90, 77, 3)).astype(np.uint8)
    path = tmp_path / "rgb.tiff"
    tiffio.write_tiff(path, img, tile_size=32, compress=True)
    with tiffio.TiffReader(path) as reader:
        assert reader.samples_per_pixel == 3
        assert np.array_equal(reader.read_full(), img)


def test_windowed_reads_equal_crops(tmp_path):
    rng = np.random.default_rng(5)
    img = _random_image(rng, (300, 260), np.uint8)
    path = tmp_path / "w.tiff"
    tiffio.write_tiff(path, img, tile_size=64, compress=True)
    with tiffio.TiffReader(path) as reader:
        for _ in range(30):
            x0 = int(rng.integers(0, 250))
            y0 = int(rng.integers(0, 290))
            x1 = int(rng.integers(x0 + 1, 261))
            y1 = int(rng.integers(y0 + 1, 301))
            assert np.array_equal(reader.read_window(x0, y0, x1, y1),
                                  img[y0:y1, x0:x1])


def test_windows_tile_without_gap_or_overlap(tmp_path):
    rng = np.random.default_rng(6)
    img = _random_image(rng, (128, 128), np.uint8)
    path = tmp_path / "tile.tiff"
    tiffio.write_tiff(path, img, tile_size=32)
    rebuilt = np.zeros_like(img)
    with tiffio.TiffReader(path) as reader:
        for y in range(0, 128, 40):
            for x in range(0, 128, 40):
                x1, y1 = min(x + 40, 128), min(y + 40, 128)
                rebuilt[y:y1, x:x1] = reader.read_window(x, y, x1, y1)
    assert np.array_equal(rebuilt, img)


def test_out_of_bounds_window(tmp_path):
    img = np.zeros((10, 10), np.uint8)
    path = tmp_path / "b.tiff"
    tiffio.write_tiff(path, img)
    with tiffio.TiffReader(path) as reader:
        with pytest.raises(BoundsError):
            reader.read_window(-1, 0, 4, 4)
        with pytest.raises(BoundsError):
            reader.read_window(0, 0, 11, 4)


def test_pillow_reads_our_tiled_deflate(tmp_path):
    rng = np.random.default_rng(7)
    img = _random_image(rng, (100, 130), np.uint8)
    path = tmp_path / "interop.tiff"
    tiffio.write_tiff(path, img, tile_size=64, compress=True)
    with Image.open(path) as pil:
        assert np.array_equal(np.asarray(pil), img)


def test_we_read_pillow_striped(tmp_path):
    rng = np.random.default_rng(8)
    img = _random_image(rng, (64, 80), np.uint8)
    path = tmp_path / "pil.tiff"
    Image.fromarray(img).save(path)
    with tiffio.TiffReader(path) as reader:
        assert np.array_equal(reader.read_full(), img)


def test_deterministic_bytes(tmp_path):
    rng = np.random.default_rng(9)
    img = _random_image(rng, (70, 90), np.uint16)
    a, b = tmp_path / "a.tiff", tmp_path / "b.tiff"
    tiffio.write_tiff(a, img, tile_size=32, compress=True)
    tiffio.write_tiff(b, img.copy(), tile_size=32, compress=True)
    assert a.read_bytes() == b.read_bytes()


def test_not_a_tiff(tmp_path):
    path = tmp_path / "junk.tiff"
    path.write_bytes(b"not a tiff at all")
    with pytest.raises(ParseError):
        tiffio.TiffReader(path)
