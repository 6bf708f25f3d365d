"""Frame-statistics scores against independent brute-force oracles.

The oracles here avoid the library code paths: convolutions are nested
Python loops with explicit border replication, the DFT oracle is the
direct O(N^4) double sum, and entropy/contrast are recomputed from first
principles.
"""

import math

import numpy as np
import pytest

from t2vqa.features.statistics import (
    color_distribution_score,
    contrast_score,
    entropy_score,
    sharpness_score,
    spectral_score,
    texture_score,
)


# --------------------------------------------------------------------------
# Oracles


def conv_replicate(img, kernel):
    """Naive correlation with replicated borders (independent oracle)."""
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros_like(img, dtype=float)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-ry, ry + 1):
                for dx in range(-rx, rx + 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += img[yy, xx] * kernel[dy + ry, dx + rx]
            out[y, x] = acc
    return out


def gaussian_kernel(size, sigma):
    coords = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def texture_oracle(img):
    blurred = conv_replicate(img.astype(float), gaussian_kernel(5, 1.0))
    sx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=float)
    gx = conv_replicate(blurred, sx)
    gy = conv_replicate(blurred, sx.T)
    mag = np.sqrt(gx ** 2 + gy ** 2)
    return float(np.mean((mag - mag.mean()) ** 2))


def sharpness_oracle(img):
    k = np.array([[0, -1, 0], [-1, 5, -1], [0, -1, 0]], dtype=float)
    sharpened = np.clip(conv_replicate(img.astype(float), k), 0, 255)
    return math.sqrt(float(np.mean((img.astype(float) - sharpened) ** 2)))


def dft_magnitude_oracle(channel):
    """Direct O(N^4) two-dimensional DFT magnitude."""
    h, w = channel.shape
    out = np.zeros((h, w))
    for u in range(h):
        for v in range(w):
            acc = 0.0 + 0.0j
            for y in range(h):
                for x in range(w):
                    acc += channel[y, x] * np.exp(-2j * np.pi * (u * y / h + v * x / w))
            out[u, v] = abs(acc)
    return out


def spectral_oracle(frame):
    means, stds = [], []
    for ch in range(3):
        mag = dft_magnitude_oracle(frame[..., ch].astype(float))
        means.append(mag.mean())
        stds.append(mag.std())
    return sum(stds) / sum(means) if sum(means) else 0.0


def entropy_oracle(img):
    total = img.size
    acc = 0.0
    for value in range(256):
        count = int(np.sum(img == value))
        if count:
            p = count / total
            acc -= p * math.log2(p)
    return acc


# --------------------------------------------------------------------------
# Texture


class TestTexture:
    def test_constant_is_zero(self):
        assert texture_score(np.full((16, 16), 77, dtype=np.uint8)) == 0.0

    def test_step_edge_matches_oracle(self):
        img = np.zeros((16, 16), dtype=np.uint8)
        img[:, 8:] = 255
        np.testing.assert_allclose(texture_score(img), texture_oracle(img), rtol=1e-6)

    def test_random_frames_match_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(3):
            img = rng.integers(0, 256, size=(12, 14), dtype=np.uint8)
            np.testing.assert_allclose(texture_score(img), texture_oracle(img),
                                       rtol=1e-6)

    def test_nonnegative(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            img = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
            assert texture_score(img) >= 0.0

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            texture_score(np.zeros((2, 8), dtype=np.uint8))


class TestSharpness:
    def test_constant_is_zero(self):
        assert sharpness_score(np.full((10, 10), 128, dtype=np.uint8)) == 0.0

    def test_single_bright_pixel_matches_oracle(self):
        img = np.zeros((16, 16), dtype=np.uint8)
        img[7, 9] = 200
        np.testing.assert_allclose(sharpness_score(img), sharpness_oracle(img),
                                   rtol=1e-6)

    def test_random_frames_match_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(3):
            img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
            np.testing.assert_allclose(sharpness_score(img), sharpness_oracle(img),
                                       rtol=1e-6)

    def test_checkerboard_sharper_than_blurred(self):
        # Mid-range values keep the sharpened response inside [0, 255];
        # a full 0/255 board saturates the clamp and degenerates to 0.
        board = (np.indices((16, 16)).sum(axis=0) % 2 * 16 + 120).astype(np.uint8)
        from scipy.ndimage import uniform_filter

        blurred = uniform_filter(board.astype(float), size=3).astype(np.uint8)
        assert sharpness_score(board) > sharpness_score(blurred)


class TestColorDistribution:
    def test_single_colour_is_one(self):
        frame = np.full((8, 8, 3), [10, 200, 30], dtype=np.uint8)
        assert color_distribution_score(frame) == 1.0

    def test_half_green_half_magenta_splits_evenly(self):
        frame = np.zeros((8, 8, 3), dtype=np.uint8)
        frame[:4] = [0, 255, 0]       # green: negative A
        frame[4:] = [255, 0, 255]     # magenta: positive A
        assert color_distribution_score(frame) == pytest.approx(0.5, abs=0.02)

    def test_majority_low_a_cluster(self):
        frame = np.zeros((10, 10, 3), dtype=np.uint8)
        frame[:] = [255, 0, 255]
        frame[:3] = [0, 255, 0]       # 30% green
        assert color_distribution_score(frame) == pytest.approx(0.3, abs=0.02)

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        a = color_distribution_score(frame, seed=42)
        b = color_distribution_score(frame, seed=42)
        assert a == b

    def test_in_unit_interval(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            frame = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
            assert 0.0 <= color_distribution_score(frame) <= 1.0


class TestSpectral:
    def test_constant_nonzero_matches_oracle(self):
        frame = np.full((8, 8, 3), 90, dtype=np.uint8)
        np.testing.assert_allclose(spectral_score(frame), spectral_oracle(frame),
                                   rtol=1e-6)

    def test_random_8x8_matches_oracle(self):
        rng = np.random.default_rng(5)
        frame = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
        np.testing.assert_allclose(spectral_score(frame), spectral_oracle(frame),
                                   rtol=1e-6)

    def test_all_zero_is_zero(self):
        assert spectral_score(np.zeros((8, 8, 3), dtype=np.uint8)) == 0.0

    def test_noise_scores_above_constant_in_spatial_mode(self):
        # The intensity-domain variant orders noise above flat frames; in
        # the Fourier variant a flat frame concentrates all energy in the
        # DC bin, which *raises* its dispersion ratio instead.
        rng = np.random.default_rng(6)
        noise = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        flat = np.full((16, 16, 3), 128, dtype=np.uint8)
        assert spectral_score(noise, mode="spatial") > spectral_score(flat, mode="spatial")

    def test_spatial_mode(self):
        frame = np.zeros((4, 4, 3), dtype=np.uint8)
        frame[:2] = 100  # half 100, half 0 per channel
        expected = (3 * 50.0) / (3 * 50.0)  # std 50, mean 50 per channel
        assert spectral_score(frame, mode="spatial") == pytest.approx(expected)
        with pytest.raises(ValueError):
            spectral_score(frame, mode="wavelet")


class TestEntropy:
    def test_constant_is_zero(self):
        assert entropy_score(np.full((8, 8), 5, dtype=np.uint8)) == 0.0

    def test_two_equal_values_is_one_bit(self):
        img = np.zeros((4, 4), dtype=np.uint8)
        img[:2] = 200
        assert entropy_score(img) == pytest.approx(1.0, abs=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(7)
        img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        np.testing.assert_allclose(entropy_score(img), entropy_oracle(img), rtol=1e-6)

    def test_bounded_by_eight_bits(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
            assert 0.0 <= entropy_score(img) <= 8.0


class TestContrast:
    def test_constant_is_zero(self):
        assert contrast_score(np.full((8, 8), 100, dtype=np.uint8)) == 0.0

    def test_checkerboard_is_one(self):
        board = (np.indices((8, 8)).sum(axis=0) % 2 * 255).astype(np.uint8)
        assert contrast_score(board) == pytest.approx(1.0, abs=1e-12)

    def test_all_black_is_zero(self):
        assert contrast_score(np.zeros((8, 8), dtype=np.uint8)) == 0.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(9)
        img = rng.integers(1, 256, size=(16, 16), dtype=np.uint8)
        x = img.astype(float)
        expected = math.sqrt(np.mean((x - x.mean()) ** 2)) / x.mean()
        np.testing.assert_allclose(contrast_score(img), expected, rtol=1e-6)
