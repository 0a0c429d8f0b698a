"""Label-free emotion embedding: squared class scores contracted with the per-emotion heads."""

from __future__ import annotations

import torch
from torch import nn

from ..models.layers import LEAKY_SLOPE
from ..models.style import StyleEncoder

CLASSIFIER_HIDDEN = 64


def squared_scores(logits: torch.Tensor) -> torch.Tensor:
    """Softmax then element-wise square: weights in [0, 1] summing to at most 1."""
    return torch.softmax(logits, dim=-1) ** 2


def contract(weights: torch.Tensor, heads: torch.Tensor) -> torch.Tensor:
    """[B, N] weights . [B, N, D] head outputs -> [B, D]."""
    return torch.einsum("bn,bnd->bd", weights, heads)


class EmbeddingExtractor(nn.Module):
    """Stage-I emotion style encoder extended with a small classification head.

    ``Emb(X) = sum_i p_i(X)^2 * H_i(X)`` where ``p`` is the softmax over the
    classifier logits and ``H_i`` is head ``i`` of the encoder applied to the
    shared trunk output.
    """

    def __init__(self, encoder: StyleEncoder):
        super().__init__()
        self.encoder = encoder
        hidden = encoder.project.out_features
        self.classifier = nn.Sequential(
            nn.Linear(hidden, CLASSIFIER_HIDDEN),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Linear(CLASSIFIER_HIDDEN, encoder.n_domains),
        )

    @property
    def n_classes(self) -> int:
        return self.encoder.n_domains

    def freeze_trunk(self) -> None:
        """Stage II scope: trunk fixed, heads and classifier trainable."""
        for module in (self.encoder.stem, self.encoder.blocks, self.encoder.project):
            for p in module.parameters():
                p.requires_grad_(False)
        for p in list(self.encoder.heads.parameters()) + list(self.classifier.parameters()):
            p.requires_grad_(True)

    def freeze(self) -> None:
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def parts(self, mel: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """(logits [B, N], weights [B, N], head outputs [B, N, D])."""
        hidden = self.encoder.trunk(mel)
        logits = self.classifier(hidden)
        heads = self.encoder.heads_of(hidden)
        return logits, squared_scores(logits), heads

    def logits(self, mel: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.encoder.trunk(mel))

    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        _, weights, heads = self.parts(mel)
        return contract(weights, heads)


def build_extractor(encoder: StyleEncoder) -> EmbeddingExtractor:
    return EmbeddingExtractor(encoder)


def extract(extractor: EmbeddingExtractor, mel: torch.Tensor) -> torch.Tensor:
    """Emotion embedding [B, 64] (differentiable in ``mel``; parameters untouched)."""
    return extractor(mel)
