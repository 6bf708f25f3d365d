"""Pristine-statistics quality score (NIQE-style).

A multivariate Gaussian is fitted to the 36-dimensional NSS features of
patches from a pristine corpus.  A frame is scored by the Mahalanobis-type
distance between that model and the Gaussian fitted to the frame's own
patches; larger distances mean less natural statistics.  The score is
computed per channel plane where needed (grayscale and Y/U/V).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from t2vqa import modelfile
from t2vqa.features import nss
from t2vqa.validation import as_float_image

DEFAULT_PATCH_SIZE = 96
MIN_FIT_FRAMES = 10


@dataclass(frozen=True)
class NiqeModel:
    """Pristine-corpus model: MVG mean/covariance over patch features."""

    mean: np.ndarray
    covariance: np.ndarray
    patch_size: int

    def __post_init__(self):
        if self.mean.ndim != 1:
            raise ValueError("mean must be a vector")
        d = self.mean.shape[0]
        if self.covariance.shape != (d, d):
            raise ValueError(
                f"covariance shape {self.covariance.shape} does not match "
                f"feature dimension {d}"
            )
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-8):
            raise ValueError("covariance must be symmetric")

    @property
    def feature_dim(self) -> int:
        return int(self.mean.shape[0])

    def save(self, path: str | Path) -> None:
        modelfile.write_model(path, "niqe", {
            "feature_dim": self.feature_dim,
            "patch_size": int(self.patch_size),
            "mean": modelfile.encode_array(self.mean),
            "covariance": modelfile.encode_array(self.covariance),
        })

    @classmethod
    def load(cls, path: str | Path) -> "NiqeModel":
        doc = modelfile.read_model(path, "niqe")
        model = cls(
            mean=modelfile.decode_array(doc["mean"]),
            covariance=modelfile.decode_array(doc["covariance"]),
            patch_size=int(doc["patch_size"]),
        )
        if model.feature_dim != doc.get("feature_dim"):
            raise modelfile.ModelFormatError(
                f"feature_dim mismatch in {path}: matrix says {model.feature_dim}, "
                f"header says {doc.get('feature_dim')}"
            )
        return model


@dataclass(frozen=True)
class NiqeResult:
    """Score plus the edge-case flags callers may need to surface."""

    score: float
    degenerate: bool = False
    used_pinv: bool = False

    def __float__(self) -> float:
        return self.score


def fit_niqe_model(frames: Iterable[np.ndarray],
                   patch_size: int = DEFAULT_PATCH_SIZE) -> NiqeModel:
    """Fit the pristine MVG model on a corpus of frames.

    RGB frames are converted to grayscale; grayscale planes are used as
    given.  Requires at least ``MIN_FIT_FRAMES`` frames, each holding at
    least one full patch; at least two patches overall are needed to
    estimate the covariance.
    """
    from t2vqa.media import to_grayscale

    frames = [to_grayscale(f) if np.asarray(f).ndim == 3 else f for f in frames]
    if len(frames) < MIN_FIT_FRAMES:
        raise ValueError(
            f"need at least {MIN_FIT_FRAMES} pristine frames to fit, got {len(frames)}"
        )
    blocks = [nss.patch_feature_matrix(as_float_image(f), patch_size) for f in frames]
    features = np.vstack(blocks)
    if features.shape[0] < 2:
        raise ValueError("insufficient patches to estimate a covariance")
    mean = features.mean(axis=0)
    cov = np.cov(features, rowvar=False)
    cov = 0.5 * (cov + cov.T)
    return NiqeModel(mean=mean, covariance=cov, patch_size=patch_size)


def _mahalanobis_distance(diff: np.ndarray, mid_cov: np.ndarray) -> tuple[float, bool]:
    used_pinv = False
    try:
        solved = np.linalg.solve(mid_cov, diff)
        if not np.all(np.isfinite(solved)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        solved = np.linalg.pinv(mid_cov) @ diff
        used_pinv = True
    value = float(diff @ solved)
    return float(np.sqrt(max(value, 0.0))), used_pinv


def niqe_score(frame: np.ndarray, model: NiqeModel) -> NiqeResult:
    """Distance of a frame's patch-feature distribution to the pristine model.

    The frame (grayscale or one channel plane) must be at least twice the
    model's patch size per side.  A constant frame has no defined MSCN
    statistics; it is scored as the zero feature vector with the
    ``degenerate`` flag set.  A singular pooled covariance falls back to
    the pseudo-inverse, flagged via ``used_pinv``.
    """
    img = as_float_image(frame)
    if img.ndim != 2:
        raise ValueError(f"expected a single channel plane, got shape {img.shape}")
    if min(img.shape) < 2 * model.patch_size:
        raise ValueError(
            f"frame of shape {img.shape} is smaller than twice the patch size "
            f"({model.patch_size}); refit with a smaller patch size"
        )

    if float(np.std(img)) == 0.0:
        sample_mean = np.zeros(model.feature_dim)
        sample_cov = np.zeros((model.feature_dim, model.feature_dim))
        degenerate = True
    else:
        features = nss.patch_feature_matrix(img, model.patch_size)
        sample_mean = features.mean(axis=0)
        if features.shape[0] >= 2:
            sample_cov = np.cov(features, rowvar=False)
            sample_cov = 0.5 * (sample_cov + sample_cov.T)
        else:
            sample_cov = np.zeros((model.feature_dim, model.feature_dim))
        degenerate = False

    diff = model.mean - sample_mean
    mid_cov = 0.5 * (model.covariance + sample_cov)
    score, used_pinv = _mahalanobis_distance(diff, mid_cov)
    return NiqeResult(score=score, degenerate=degenerate, used_pinv=used_pinv)


class NiqeScorer(BaseEstimator):
    """Estimator-style wrapper: ``fit`` on pristine frames, ``score_frame``
    on new ones."""

    def __init__(self, patch_size: int = DEFAULT_PATCH_SIZE):
        self.patch_size = patch_size

    def fit(self, frames: Sequence[np.ndarray], y=None) -> "NiqeScorer":
        self.model_ = fit_niqe_model(frames, patch_size=self.patch_size)
        return self

    def score_frame(self, frame: np.ndarray) -> float:
        return self.score_frame_detailed(frame).score

    def score_frame_detailed(self, frame: np.ndarray) -> NiqeResult:
        if not hasattr(self, "model_"):
            raise ValueError("NiqeScorer is not fitted; call fit() first")
        return niqe_score(frame, self.model_)
