"""Per-frame naturalness statistics and per-video aggregation."""

from t2vqa.features.brisque import BrisqueModel, brisque_score
from t2vqa.features.extract import (
    FEATURE_COLUMNS,
    PER_FRAME_FEATURES,
    FeatureVector,
    extract_video_features,
)
from t2vqa.features.inception import (
    inception_score,
    load_class_probs,
    modified_inception_score,
    save_class_probs,
)
from t2vqa.features.keypoints import blob_stats, orb_stats
from t2vqa.features.niqe import (
    NiqeModel,
    NiqeResult,
    NiqeScorer,
    fit_niqe_model,
    niqe_score,
)
from t2vqa.features.statistics import (
    color_distribution_score,
    contrast_score,
    entropy_score,
    sharpness_score,
    spectral_score,
    texture_score,
)

__all__ = [
    "BrisqueModel", "brisque_score",
    "FEATURE_COLUMNS", "PER_FRAME_FEATURES", "FeatureVector", "extract_video_features",
    "inception_score", "load_class_probs", "modified_inception_score", "save_class_probs",
    "blob_stats", "orb_stats",
    "NiqeModel", "NiqeResult", "NiqeScorer", "fit_niqe_model", "niqe_score",
    "color_distribution_score", "contrast_score", "entropy_score",
    "sharpness_score", "spectral_score", "texture_score",
]
