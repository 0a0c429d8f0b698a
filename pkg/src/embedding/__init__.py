"""Label-free emotion embedding.

The two training stages live in :mod:`.stage1` and :mod:`.stage2`; they
depend on the training package and are imported from there explicitly.
"""

from .extractor import (
    CLASSIFIER_HIDDEN,
    EmbeddingExtractor,
    build_extractor,
    contract,
    extract,
    squared_scores,
)

__all__ = [
    "CLASSIFIER_HIDDEN",
    "EmbeddingExtractor",
    "build_extractor",
    "contract",
    "extract",
    "squared_scores",
]
