"""Natural scene statistics: MSCN coefficients and generalized Gaussian fits.

Shared substrate for the two no-reference quality scores.  The pipeline is
the classical one: divisively normalize luminance against a local Gaussian
mean/deviation estimate (MSCN), then summarize each patch by the fitted
parameters of a generalized Gaussian over the coefficients and of
asymmetric generalized Gaussians over four orientations of neighbouring
coefficient products.  18 parameters per patch and scale; two scales give
the 36-dimensional per-patch feature vector.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate
from scipy.special import gamma as gamma_fn

FEATURES_PER_SCALE = 18
FEATURE_DIM = 36

# Shape-parameter search grid for the moment-matching fits.
_GAM = np.linspace(0.2, 10.0, 9801)
_R_GGD = gamma_fn(1.0 / _GAM) * gamma_fn(3.0 / _GAM) / gamma_fn(2.0 / _GAM) ** 2
_R_AGGD = gamma_fn(2.0 / _GAM) ** 2 / (gamma_fn(1.0 / _GAM) * gamma_fn(3.0 / _GAM))

_EPS = 1e-12


def _gaussian_window(size: int = 7, sigma: float = 7.0 / 6.0) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()

_MSCN_WINDOW = _gaussian_window()


def mscn_coefficients(image: np.ndarray) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients of a float image.

    Local mean and deviation come from a 7x7 Gaussian window (replicated
    borders); the +1 in the denominator keeps flat regions finite.
    """
    img = np.asarray(image, dtype=np.float64)
    mu = correlate(img, _MSCN_WINDOW, mode="nearest")
    sigma_sq = correlate(img * img, _MSCN_WINDOW, mode="nearest") - mu * mu
    sigma = np.sqrt(np.abs(sigma_sq))
    return (img - mu) / (sigma + 1.0)


def fit_ggd(values: np.ndarray) -> tuple[float, float]:
    """Moment-matching fit of a zero-mean generalized Gaussian.

    Returns ``(shape, variance)``.  The shape parameter comes from a grid
    search over the moment ratio E[x^2] / E[|x|]^2.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    var = float(np.mean(x * x))
    mean_abs = float(np.mean(np.abs(x)))
    if var < _EPS or mean_abs < _EPS:
        return 10.0, 0.0
    rho = var / (mean_abs * mean_abs)
    alpha = float(_GAM[np.argmin((_R_GGD - rho) ** 2)])
    return alpha, var


def fit_aggd(values: np.ndarray) -> tuple[float, float, float]:
    """Moment-matching fit of an asymmetric generalized Gaussian.

    Returns ``(shape, beta_left, beta_right)`` where the betas are the
    per-side scale parameters.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    neg = x[x < 0]
    pos = x[x > 0]
    left_std = np.sqrt(np.mean(neg * neg)) if neg.size else 0.0
    right_std = np.sqrt(np.mean(pos * pos)) if pos.size else 0.0
    if left_std < _EPS and right_std < _EPS:
        return 10.0, 0.0, 0.0
    gamma_hat = (left_std + _EPS) / (right_std + _EPS)
    mean_sq = float(np.mean(x * x))
    r_hat = float(np.mean(np.abs(x))) ** 2 / max(mean_sq, _EPS)
    r_norm = r_hat * (gamma_hat ** 3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat ** 2 + 1.0) ** 2
    alpha = float(_GAM[np.argmin((_R_AGGD - r_norm) ** 2)])
    scale = np.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    return alpha, float(left_std * scale), float(right_std * scale)


def _paired_products(m: np.ndarray) -> list[np.ndarray]:
    # horizontal, vertical, main diagonal, anti-diagonal neighbours
    return [
        m[:, :-1] * m[:, 1:],
        m[:-1, :] * m[1:, :],
        m[:-1, :-1] * m[1:, 1:],
        m[:-1, 1:] * m[1:, :-1],
    ]


def scale_features(mscn: np.ndarray) -> np.ndarray:
    """18 statistics of one MSCN patch: GGD of the coefficients plus AGGD
    parameters (shape, asymmetry, left/right scale) of the four orientation
    products."""
    feats = list(fit_ggd(mscn))
    for prod in _paired_products(mscn):
        alpha, beta_l, beta_r = fit_aggd(prod)
        eta = (beta_r - beta_l) * gamma_fn(2.0 / alpha) / gamma_fn(1.0 / alpha)
        feats.extend([alpha, eta, beta_l, beta_r])
    return np.array(feats)


def _half_scale(image: np.ndarray) -> np.ndarray:
    # 2x2 block average; odd trailing rows/columns are dropped
    h, w = image.shape
    img = image[: h - h % 2, : w - w % 2]
    return 0.25 * (img[0::2, 0::2] + img[0::2, 1::2] + img[1::2, 0::2] + img[1::2, 1::2])


def patch_feature_matrix(image: np.ndarray, patch_size: int) -> np.ndarray:
    """36-dimensional NSS features for every full patch of the image.

    Patches tile the image from the top-left; partial border patches are
    dropped.  Rows of the result pair the 18 full-resolution statistics of
    a patch with the 18 statistics of the same region at half resolution.

    Raises
    ------
    ValueError
        If the image holds no complete patch or the patch size is not even.
    """
    img = np.asarray(image, dtype=np.float64)
    if patch_size < 8 or patch_size % 2 != 0:
        raise ValueError(f"patch_size must be an even integer >= 8, got {patch_size}")
    h, w = img.shape
    rows, cols = h // patch_size, w // patch_size
    if rows < 1 or cols < 1:
        raise ValueError(
            f"image of shape {img.shape} is smaller than one {patch_size}x{patch_size} patch"
        )
    mscn_full = mscn_coefficients(img)
    mscn_half = mscn_coefficients(_half_scale(img))
    half = patch_size // 2

    features = np.empty((rows * cols, FEATURE_DIM))
    idx = 0
    for r in range(rows):
        for c in range(cols):
            full_patch = mscn_full[r * patch_size:(r + 1) * patch_size,
                                   c * patch_size:(c + 1) * patch_size]
            half_patch = mscn_half[r * half:(r + 1) * half, c * half:(c + 1) * half]
            features[idx, :FEATURES_PER_SCALE] = scale_features(full_patch)
            features[idx, FEATURES_PER_SCALE:] = scale_features(half_patch)
            idx += 1
    return features
