"""Per-video feature aggregation.

Every per-frame statistic is computed on every frame and summarized by its
mean and standard deviation across frames (population std, so single-frame
videos report 0).  The class-distribution score is a single video-level
value.  Features whose optional inputs are missing are flagged absent, not
zero-filled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from t2vqa.features import inception, keypoints, statistics
from t2vqa.features.brisque import BrisqueModel, brisque_score
from t2vqa.features.niqe import NiqeModel, niqe_score
from t2vqa.media import FrameSequence, YuvLayout, rgb_to_yuv444, to_grayscale

PER_FRAME_FEATURES = (
    "texture",
    "sharpness",
    "color_dist",
    "spectral",
    "entropy",
    "contrast",
    "orb_kp_count",
    "orb_dist_mean",
    "orb_dist_std",
    "orb_desc_mean",
    "orb_desc_std",
    "blob_count",
    "blob_size_mean",
    "blob_size_std",
    "niqe_gray",
    "niqe_y",
    "niqe_u",
    "niqe_v",
    "brisque",
)

VIDEO_FEATURES = ("mis",)

# Canonical flat column order used by feature files and classifier input.
FEATURE_COLUMNS = tuple(
    f"{name}_{stat}" for name in PER_FRAME_FEATURES for stat in ("mean", "std")
) + VIDEO_FEATURES


@dataclass(frozen=True)
class FeatureVector:
    """Aggregated per-video features keyed by ``FEATURE_COLUMNS`` names."""

    values: dict[str, float]
    absent: tuple[str, ...] = ()
    seed: int = 42
    flags: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.values) - set(FEATURE_COLUMNS)
        if unknown:
            raise ValueError(f"unknown feature columns: {sorted(unknown)}")
        overlap = set(self.values) & set(self.absent)
        if overlap:
            raise ValueError(f"features both present and absent: {sorted(overlap)}")
        for name, v in self.values.items():
            if not np.isfinite(v):
                raise ValueError(f"feature {name} is not finite: {v}")

    def to_flat_dict(self) -> dict:
        out = {name: self.values[name] for name in FEATURE_COLUMNS if name in self.values}
        out["meta"] = {"seed": self.seed, "absent_features": sorted(self.absent)}
        return out

    def as_row(self, columns=FEATURE_COLUMNS) -> np.ndarray:
        """Dense row with NaN in absent columns (imputed downstream)."""
        return np.array([self.values.get(c, np.nan) for c in columns])


def extract_video_features(
    video: FrameSequence,
    niqe_model: NiqeModel,
    brisque_model: BrisqueModel | None = None,
    probs: np.ndarray | None = None,
    seed: int = 42,
    spectral_mode: str = "fourier",
) -> FeatureVector:
    """Compute the full aggregated FeatureVector for one video.

    ``probs`` are the per-frame class distributions from the external
    classifier; without them the video-level score is flagged absent, as
    is the block-quality score without ``brisque_model``.
    """
    per_frame: dict[str, list[float]] = {name: [] for name in PER_FRAME_FEATURES}
    flags: dict[str, bool] = {}

    for rgb in video.frames:
        gray = to_grayscale(rgb)
        yuv = rgb_to_yuv444(rgb, YuvLayout.PLANAR)

        per_frame["texture"].append(statistics.texture_score(gray))
        per_frame["sharpness"].append(statistics.sharpness_score(gray))
        per_frame["color_dist"].append(statistics.color_distribution_score(rgb, seed=seed))
        per_frame["spectral"].append(statistics.spectral_score(rgb, mode=spectral_mode))
        per_frame["entropy"].append(statistics.entropy_score(gray))
        per_frame["contrast"].append(statistics.contrast_score(gray))

        kp_count, dist_mean, dist_std, desc_mean, desc_std = keypoints.orb_stats(gray)
        per_frame["orb_kp_count"].append(kp_count)
        per_frame["orb_dist_mean"].append(dist_mean)
        per_frame["orb_dist_std"].append(dist_std)
        per_frame["orb_desc_mean"].append(desc_mean)
        per_frame["orb_desc_std"].append(desc_std)

        blob_count, size_mean, size_std = keypoints.blob_stats(gray)
        per_frame["blob_count"].append(blob_count)
        per_frame["blob_size_mean"].append(size_mean)
        per_frame["blob_size_std"].append(size_std)

        for name, plane in (("niqe_gray", gray), ("niqe_y", yuv.y),
                            ("niqe_u", yuv.u), ("niqe_v", yuv.v)):
            result = niqe_score(plane, niqe_model)
            per_frame[name].append(result.score)
            if result.degenerate:
                flags[f"{name}_degenerate"] = True
            if result.used_pinv:
                flags[f"{name}_used_pinv"] = True

        if brisque_model is not None:
            per_frame["brisque"].append(brisque_score(gray, brisque_model))

    values: dict[str, float] = {}
    absent: list[str] = []
    for name in PER_FRAME_FEATURES:
        samples = per_frame[name]
        if not samples:
            absent.extend([f"{name}_mean", f"{name}_std"])
            continue
        arr = np.asarray(samples, dtype=np.float64)
        values[f"{name}_mean"] = float(np.mean(arr))
        values[f"{name}_std"] = float(np.std(arr))

    if probs is not None:
        values["mis"] = inception.modified_inception_score(probs)
    else:
        absent.append("mis")

    return FeatureVector(values=values, absent=tuple(absent), seed=seed, flags=flags)
