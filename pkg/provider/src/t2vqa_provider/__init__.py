"""Model-provider HTTP service: captioning, sentence embedding, and
class-probability endpoints with a deterministic offline stub mode."""

from t2vqa_provider.server import make_server
from t2vqa_provider.stub import CAPTION_PHRASES, StubModel

__version__ = "0.1.0"

__all__ = ["CAPTION_PHRASES", "StubModel", "make_server", "__version__"]
