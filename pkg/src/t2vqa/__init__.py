"""Quality assessment toolkit for text-to-video model outputs.

Two metric branches -- image naturalness (hand-crafted frame statistics fed
to a gradient-boosted tree classifier) and prompt-to-caption semantic
similarity -- are combined by a linear ensemble fitted against human
ratings.  A separate analysis layer reproduces the opinion-score pipeline
(score adjustment, per-model statistics, Tukey HSD, prompt-length effects).
"""

__version__ = "0.1.0"

from t2vqa.media import (
    FrameSequence,
    Yuv444Frame,
    YuvLayout,
    load_frames,
    load_manifest,
    planar_to_interleaved,
    rgb_to_lab,
    rgb_to_yuv444,
    to_grayscale,
)
from t2vqa.features import (
    FEATURE_COLUMNS,
    FeatureVector,
    blob_stats,
    brisque_score,
    color_distribution_score,
    contrast_score,
    entropy_score,
    extract_video_features,
    fit_niqe_model,
    inception_score,
    modified_inception_score,
    niqe_score,
    orb_stats,
    sharpness_score,
    spectral_score,
    texture_score,
)
from t2vqa.boosting import (
    GradientBoostedNaturalnessClassifier,
    TrainConfig,
    f1_score,
    grid_search,
    predict_naturalness,
    train_gbt,
)
from t2vqa.textsim import (
    CaptionSet,
    SimilarityReport,
    bow_cosine,
    caption_video,
    combined_similarity,
    embedding_cosine,
    video_text_similarity,
)
from t2vqa.ensemble import (
    EnsembleWeights,
    LinearEnsembleCombiner,
    fit_ensemble,
    score_video,
)
from t2vqa.ratings import (
    RatingsTable,
    adjust_scores,
    model_stats,
    prompt_length_bucket,
    rank_agreement,
    rank_models,
    tukey_hsd,
)
from t2vqa.providers import (
    FileProvider,
    HttpProvider,
    ProviderError,
    StubProvider,
    make_provider,
)

__all__ = [
    "__version__",
    # media
    "FrameSequence", "Yuv444Frame", "YuvLayout", "load_frames", "load_manifest",
    "planar_to_interleaved", "rgb_to_lab", "rgb_to_yuv444", "to_grayscale",
    # features
    "FEATURE_COLUMNS", "FeatureVector", "blob_stats", "brisque_score",
    "color_distribution_score", "contrast_score", "entropy_score",
    "extract_video_features", "fit_niqe_model", "inception_score",
    "modified_inception_score", "niqe_score", "orb_stats", "sharpness_score",
    "spectral_score", "texture_score",
    # classifier
    "GradientBoostedNaturalnessClassifier", "TrainConfig", "f1_score",
    "grid_search", "predict_naturalness", "train_gbt",
    # text similarity
    "CaptionSet", "SimilarityReport", "bow_cosine", "caption_video",
    "combined_similarity", "embedding_cosine", "video_text_similarity",
    # ensemble
    "EnsembleWeights", "LinearEnsembleCombiner", "fit_ensemble", "score_video",
    # ratings
    "RatingsTable", "adjust_scores", "model_stats", "prompt_length_bucket",
    "rank_agreement", "rank_models", "tukey_hsd",
    # providers
    "FileProvider", "HttpProvider", "ProviderError", "StubProvider",
    "make_provider",
]
