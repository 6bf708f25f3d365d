"""Per-frame naturalness statistics: texture, sharpness, colour
distribution, spectral shape, entropy, and contrast.

All scores are pure functions of the pixel data (the colour-distribution
score additionally takes a clustering seed) and use population statistics
(``ddof=0``) throughout.  Convolutions replicate border pixels.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.ndimage import correlate
from sklearn.cluster import KMeans

from t2vqa.media import rgb_to_lab
from t2vqa.validation import as_float_image, check_gray_frame, check_rgb_frame

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T
_SHARPEN = np.array([[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]])


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    coords = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()

_BLUR_5X5 = _gaussian_kernel(5, 1.0)


def texture_score(frame: np.ndarray) -> float:
    """Variance of the Sobel gradient magnitude after a 5x5 Gaussian blur.

    Uniform regions score 0; complex texture scores high.
    """
    gray = as_float_image(check_gray_frame(frame, min_side=3))
    blurred = correlate(gray, _BLUR_5X5, mode="nearest")
    gx = correlate(blurred, _SOBEL_X, mode="nearest")
    gy = correlate(blurred, _SOBEL_Y, mode="nearest")
    magnitude = np.sqrt(gx * gx + gy * gy)
    return float(np.var(magnitude))


def sharpness_score(frame: np.ndarray) -> float:
    """RMS difference between a frame and its 3x3 sharpened version.

    The sharpening kernel has unit DC gain, so constant frames score 0.
    Sharpened values are clamped to the 8-bit range before differencing.
    """
    gray = as_float_image(check_gray_frame(frame))
    sharpened = np.clip(correlate(gray, _SHARPEN, mode="nearest"), 0.0, 255.0)
    diff = gray - sharpened
    return float(np.sqrt(np.mean(diff * diff)))


def color_distribution_score(frame: np.ndarray, seed: int = 42) -> float:
    """Fraction of pixels in the 2-means chroma cluster with the lower
    green-red (A) centroid coordinate.

    Clustering runs over the per-pixel (A, B) chroma pairs of the CIELAB
    frame with deterministic seeded k-means++ initialization.  When both
    centroids coincide (single-colour frames) every pixel effectively
    belongs to one cluster and the score is 1.0.
    """
    rgb = check_rgb_frame(frame)
    lab = rgb_to_lab(rgb)
    chroma = lab[..., 1:3].reshape(-1, 2)
    if np.all(chroma == chroma[0]):
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # degenerate-cluster convergence noise
        km = KMeans(n_clusters=2, init="k-means++", n_init=1, max_iter=100,
                    tol=1e-4, random_state=seed).fit(chroma)
    centers = km.cluster_centers_
    if np.allclose(centers[0], centers[1], atol=1e-9):
        return 1.0
    low_a = int(np.argmin(centers[:, 0]))
    return float(np.mean(km.labels_ == low_a))


def spectral_score(frame: np.ndarray, mode: str = "fourier") -> float:
    """Dispersion-to-mean ratio of the per-channel spectrum (or pixels).

    ``fourier`` (default): per colour channel take the 2-D DFT magnitude
    spectrum, then return the summed channel standard deviations divided
    by the summed channel means.  ``spatial`` applies the same ratio to
    raw channel intensities instead.  All-zero frames score 0.
    """
    rgb = as_float_image(check_rgb_frame(frame))
    if mode not in ("fourier", "spatial"):
        raise ValueError(f"unknown spectral mode {mode!r}")
    means, stds = [], []
    for ch in range(3):
        values = rgb[..., ch]
        if mode == "fourier":
            values = np.abs(np.fft.fft2(values))
        means.append(float(np.mean(values)))
        stds.append(float(np.std(values)))
    total_mean = sum(means)
    if total_mean == 0.0:
        return 0.0
    return sum(stds) / total_mean


def entropy_score(frame: np.ndarray) -> float:
    """Shannon entropy (bits) of the 256-bin intensity histogram."""
    gray = check_gray_frame(frame)
    counts = np.bincount(gray.ravel(), minlength=256)
    p = counts[counts > 0] / gray.size
    return float(-np.sum(p * np.log2(p)))


def contrast_score(frame: np.ndarray) -> float:
    """Coefficient of variation of pixel intensities (std / mean).

    All-black frames (zero mean) score 0.
    """
    gray = as_float_image(check_gray_frame(frame))
    mean = float(np.mean(gray))
    if mean == 0.0:
        return 0.0
    return float(np.std(gray)) / mean
