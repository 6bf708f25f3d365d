"""Input validation helpers shared across the toolkit.

All frame-level operations accept plain numpy arrays: RGB frames are
``(H, W, 3)`` uint8, grayscale frames ``(H, W)`` uint8.  The helpers here
normalize and validate those inputs so the per-feature code can assume
well-formed data.
"""

from __future__ import annotations

import numpy as np


def check_rgb_frame(frame: np.ndarray, name: str = "frame") -> np.ndarray:
    """Validate an ``(H, W, 3)`` uint8 RGB frame and return it as uint8."""
    arr = np.asarray(frame)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name}: expected (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty frame of shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise ValueError(f"{name}: expected uint8 pixel values, got dtype {arr.dtype}")
    return arr


def check_gray_frame(frame: np.ndarray, name: str = "frame", min_side: int = 1) -> np.ndarray:
    """Validate an ``(H, W)`` uint8 grayscale frame and return it as uint8."""
    arr = np.asarray(frame)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected (H, W) grayscale array, got shape {arr.shape}")
    if min(arr.shape) < min_side:
        raise ValueError(
            f"{name}: frame of shape {arr.shape} is smaller than the required "
            f"minimum side of {min_side} pixels"
        )
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise ValueError(f"{name}: expected uint8 pixel values, got dtype {arr.dtype}")
    return arr


def as_float_image(frame: np.ndarray) -> np.ndarray:
    """Return the frame as float64 without rescaling (0..255 range kept)."""
    return np.asarray(frame, dtype=np.float64)


def check_probability_rows(probs: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Validate an ``(n, K)`` array of per-frame class distributions.

    Each row must be nonnegative and sum to 1 within ``tol``.
    """
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected (n_frames, n_classes) probabilities, got shape {arr.shape}")
    if np.any(arr < 0):
        bad = int(np.argwhere(arr < 0)[0][0])
        raise ValueError(f"negative probability in frame {bad}")
    sums = arr.sum(axis=1)
    off = np.abs(sums - 1.0) > tol
    if np.any(off):
        bad = int(np.argmax(off))
        raise ValueError(f"frame {bad} probabilities sum to {sums[bad]:.8f}, expected 1")
    return arr


def check_finite(value: float | np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} contains non-finite values")
