import numpy as np
import pytest

from conftest import disk_mask, random_blob
from pathex.features.distribution import (
    radial_coordinates,
    radial_distribution,
    zernike_features,
)
from pathex.manifest import RADIAL_BINS, ZERNIKE_INDICES


class TestRadialCoordinate:
    def test_disk_centroid_in_bin_zero_boundary_in_last(self):
        mask = disk_mask(50)
        r, bins, _ = radial_coordinates(mask)
        ys, xs = np.nonzero(mask)
        center = (ys == 50) & (xs == 50)
        assert r[center] == 0.0
        assert bins[center] == 0
        boundary = xs == 100  # rightmost pixel of the disk
        assert (bins[boundary] == RADIAL_BINS - 1).all()

    def test_disk_bin_population_grows(self):
        mask = disk_mask(50)
        _, bins, _ = radial_coordinates(mask)
        counts = np.bincount(bins, minlength=RADIAL_BINS)
        # annulus area grows with radius
        assert (np.diff(counts[:11]) > 0).all()

    def test_radius_bounded(self):
        rng = np.random.default_rng(150)
        mask = random_blob(rng, 15)
        r, bins, wedges = radial_coordinates(mask)
        assert (r >= 0).all() and (r < 1).all()
        assert (bins >= 0).all() and (bins < RADIAL_BINS).all()
        assert (wedges >= 0).all() and (wedges < 8).all()


class TestRadialDistribution:
    def test_constant_disk_meanfrac_one(self):
        mask = disk_mask(50)
        values = radial_distribution(np.full(mask.shape, 0.5), mask)
        frac, mean_frac, cv = values[:12], values[12:24], values[24:]
        assert frac.sum() == pytest.approx(1.0, abs=1e-9)
        occupied = np.bincount(radial_coordinates(mask)[1], minlength=12) > 0
        assert mean_frac[occupied] == pytest.approx(1.0)
        # interior bins: discretization noise only
        assert (cv[3:] < 0.05).all()

    def test_pixel_fractions_partition(self):
        rng = np.random.default_rng(151)
        mask = random_blob(rng, 14)
        _, bins, _ = radial_coordinates(mask)
        counts = np.bincount(bins, minlength=RADIAL_BINS)
        assert counts.sum() == mask.sum()

    def test_bright_center_decays(self):
        mask = disk_mask(50)
        yy, xx = np.mgrid[0:101, 0:101]
        sigma = 50.0 / 4.0
        patch = np.exp(-((xx - 50.0) ** 2 + (yy - 50.0) ** 2) / (2 * sigma**2))
        frac = radial_distribution(patch, mask)[:12]
        peak = int(np.argmax(frac))
        assert all(frac[i] >= frac[i + 1] for i in range(peak, RADIAL_BINS - 1))

    def test_zero_intensity_all_zero(self):
        mask = disk_mask(10)
        values = radial_distribution(np.zeros(mask.shape), mask)
        assert (values == 0).all()


class TestZernike:
    def test_uniform_disk_concentrates_in_dc(self):
        mask = disk_mask(50)
        z = zernike_features(np.full(mask.shape, 0.8), mask)
        mags = z[:30]
        assert mags[0] > 0
        assert (mags[1:] < 0.01).all()

    def test_single_pixel_all_zero(self):
        z = zernike_features(np.ones((1, 1)), np.ones((1, 1), bool))
        assert (z == 0).all()

    def test_m0_phases_are_zero(self):
        rng = np.random.default_rng(152)
        mask = random_blob(rng, 13)
        z = zernike_features(rng.random(mask.shape), mask)
        phases = z[30:]
        for k, (n, m) in enumerate(ZERNIKE_INDICES):
            if m == 0:
                assert phases[k] == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_rotation_equivariance(self, seed):
        rng = np.random.default_rng(160 + seed)
        mask = random_blob(rng, 21)
        patch = rng.random(mask.shape) * 0.8 + 0.1
        base = zernike_features(patch, mask)
        # rotating the image content by 90 degrees (rot90 k=3 in array
        # terms) leaves magnitudes and shifts phase by -m*pi/2 mod 2*pi
        rot = zernike_features(np.rot90(patch, 3).copy(), np.rot90(mask, 3).copy())
        assert np.abs(rot[:30] - base[:30]).max() < 1e-3
        for k, (n, m) in enumerate(ZERNIKE_INDICES):
            if m == 0 or base[k] < 1e-4 or rot[k] < 1e-4:
                continue
            expected = base[30 + k] - m * np.pi / 2.0
            wrapped = np.angle(np.exp(1j * (rot[30 + k] - expected)))
            assert abs(wrapped) < 1e-3, (n, m)

    def test_brightness_scale_invariance(self):
        rng = np.random.default_rng(170)
        mask = random_blob(rng, 15)
        patch = rng.random(mask.shape) * 0.4 + 0.1
        a = zernike_features(patch, mask)
        b = zernike_features(patch * 2.0, mask)
        assert np.allclose(a[:30], b[:30], rtol=1e-12, atol=1e-15)
