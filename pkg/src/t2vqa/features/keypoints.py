"""Keypoint and blob statistics of a frame.

Keypoints come from the standard ORB pipeline (oriented FAST corners with
rotated-BRIEF 256-bit descriptors, capped at 500 keypoints); blobs from
multi-scale Laplacian-of-Gaussian detection.  Both detectors are backed by
their mature library implementations (OpenCV and scikit-image) and reduced
here to the scalar statistics consumed by the classifier.
"""

from __future__ import annotations

import math

import cv2
import numpy as np
from scipy.spatial.distance import pdist
from skimage.feature import blob_log

from t2vqa.validation import check_gray_frame

MAX_KEYPOINTS = 500

# LoG detection parameters: scales from 1 to min(side)/8 in 10 logarithmic
# steps, peaks above 10% of the maximum response, 50% overlap suppression.
BLOB_NUM_SIGMA = 10
BLOB_THRESHOLD_REL = 0.1
BLOB_OVERLAP = 0.5


def orb_stats(frame: np.ndarray) -> tuple[float, float, float, float, float]:
    """ORB keypoint statistics of a grayscale frame.

    Returns ``(kp_count, dist_mean, dist_std, desc_mean, desc_std)``:
    the keypoint count, mean/std of pairwise Euclidean distances between
    keypoint coordinates, and mean/std of per-descriptor popcounts (set
    bits out of 256).  A frame without detectable corners returns all
    zeros.
    """
    gray = check_gray_frame(frame)
    orb = cv2.ORB_create(nfeatures=MAX_KEYPOINTS)
    keypoints = orb.detect(gray, None)
    keypoints, descriptors = orb.compute(gray, keypoints)
    if not keypoints:
        return 0.0, 0.0, 0.0, 0.0, 0.0

    coords = np.array([kp.pt for kp in keypoints], dtype=np.float64)
    if len(coords) >= 2:
        distances = pdist(coords)
        dist_mean, dist_std = float(np.mean(distances)), float(np.std(distances))
    else:
        dist_mean = dist_std = 0.0

    if descriptors is not None and len(descriptors):
        popcounts = np.unpackbits(descriptors, axis=1).sum(axis=1).astype(np.float64)
        desc_mean, desc_std = float(np.mean(popcounts)), float(np.std(popcounts))
    else:
        desc_mean = desc_std = 0.0
    return float(len(keypoints)), dist_mean, dist_std, desc_mean, desc_std


def blob_stats(frame: np.ndarray) -> tuple[float, float, float]:
    """Laplacian-of-Gaussian blob statistics of a grayscale frame.

    Returns ``(blob_count, size_mean, size_std)`` where a blob's size is
    the radius ``sigma * sqrt(2)`` of its detecting scale.  Frames without
    blobs return all zeros.
    """
    gray = check_gray_frame(frame)
    img = gray.astype(np.float64) / 255.0
    if np.all(img == img.flat[0]):
        return 0.0, 0.0, 0.0
    max_sigma = max(min(img.shape) / 8.0, 1.0)
    blobs = blob_log(
        img,
        min_sigma=1.0,
        max_sigma=max_sigma,
        num_sigma=BLOB_NUM_SIGMA,
        log_scale=True,
        threshold=None,
        threshold_rel=BLOB_THRESHOLD_REL,
        overlap=BLOB_OVERLAP,
    )
    if blobs.shape[0] == 0:
        return 0.0, 0.0, 0.0
    sizes = blobs[:, 2] * math.sqrt(2.0)
    return float(blobs.shape[0]), float(np.mean(sizes)), float(np.std(sizes))
