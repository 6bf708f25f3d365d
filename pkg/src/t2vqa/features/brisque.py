"""Block-based spatial quality score (BRISQUE-style), inference only.

Each full block of the frame yields the 36-dimensional NSS feature vector,
which is centred, projected through a stored PCA basis, and evaluated by a
stored RBF support-vector regressor; the frame score is the mean over
blocks (higher = worse).  Training the projection and regressor is outside
this toolkit: models are consumed from parameter files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from t2vqa import modelfile
from t2vqa.features import nss
from t2vqa.validation import as_float_image

DEFAULT_BLOCK_SIZE = 96


@dataclass(frozen=True)
class BrisqueModel:
    """PCA basis plus RBF-SVR parameters for block quality regression."""

    pca_mean: np.ndarray        # (36,)
    pca_basis: np.ndarray       # (36, d) column projection
    support_vectors: np.ndarray  # (m, d)
    dual_coef: np.ndarray       # (m,)
    intercept: float
    gamma: float
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        d = self.pca_basis.shape[1]
        if self.pca_mean.shape != (self.pca_basis.shape[0],):
            raise ValueError("pca_mean does not match pca_basis rows")
        if self.support_vectors.ndim != 2 or self.support_vectors.shape[1] != d:
            raise ValueError("support vectors do not match the projected dimension")
        if self.dual_coef.shape != (self.support_vectors.shape[0],):
            raise ValueError("dual_coef does not match the support vector count")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def feature_dim(self) -> int:
        return int(self.pca_basis.shape[0])

    def save(self, path: str | Path) -> None:
        modelfile.write_model(path, "brisque", {
            "feature_dim": self.feature_dim,
            "block_size": int(self.block_size),
            "pca_mean": modelfile.encode_array(self.pca_mean),
            "pca_basis": modelfile.encode_array(self.pca_basis),
            "svr": {
                "support_vectors": modelfile.encode_array(self.support_vectors),
                "dual_coef": modelfile.encode_array(self.dual_coef),
                "intercept": float(self.intercept),
                "gamma": float(self.gamma),
            },
        })

    @classmethod
    def load(cls, path: str | Path) -> "BrisqueModel":
        doc = modelfile.read_model(path, "brisque")
        svr = doc.get("svr", {})
        try:
            return cls(
                pca_mean=modelfile.decode_array(doc["pca_mean"]),
                pca_basis=modelfile.decode_array(doc["pca_basis"]),
                support_vectors=modelfile.decode_array(svr["support_vectors"]),
                dual_coef=modelfile.decode_array(svr["dual_coef"]),
                intercept=float(svr["intercept"]),
                gamma=float(svr["gamma"]),
                block_size=int(doc.get("block_size", DEFAULT_BLOCK_SIZE)),
            )
        except (KeyError, ValueError) as exc:
            raise modelfile.ModelFormatError(f"malformed brisque model {path}: {exc}") from exc


def brisque_score(frame: np.ndarray, model: BrisqueModel) -> float:
    """Mean regressed quality over the frame's full blocks (higher = worse).

    Raises ``ValueError`` if the frame holds no complete block.
    """
    img = as_float_image(frame)
    if img.ndim != 2:
        raise ValueError(f"expected a grayscale frame, got shape {img.shape}")
    if min(img.shape) < model.block_size:
        raise ValueError(
            f"frame of shape {img.shape} is smaller than one "
            f"{model.block_size}x{model.block_size} block"
        )
    features = nss.patch_feature_matrix(img, model.block_size)
    projected = (features - model.pca_mean) @ model.pca_basis
    # RBF kernel against every support vector
    sq_dist = (
        np.sum(projected ** 2, axis=1)[:, None]
        + np.sum(model.support_vectors ** 2, axis=1)[None, :]
        - 2.0 * projected @ model.support_vectors.T
    )
    kernel = np.exp(-model.gamma * np.maximum(sq_dist, 0.0))
    block_scores = kernel @ model.dual_coef + model.intercept
    return float(np.mean(block_scores))
