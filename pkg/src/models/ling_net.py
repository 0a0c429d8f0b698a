from __future__ import annotations

import torch
from torch import nn

from ..config import ModelsConfig
from .layers import LEAKY_SLOPE


class LingNet(nn.Module):
    """Frame classifier over the toy phone inventory; its posteriors stand in for PPGs."""

    def __init__(self, n_mels: int, cfg: ModelsConfig):
        super().__init__()
        channels = cfg.ling_channels
        self.n_symbols = cfg.n_symbols
        self.body = nn.Sequential(
            nn.Conv1d(n_mels, channels, 5, padding=2),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv1d(channels, channels, 5, padding=2),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv1d(channels, channels, 3, padding=1),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv1d(channels, cfg.n_symbols, 1),
        )

    def logits(self, mel: torch.Tensor) -> torch.Tensor:
        """[B, M, T] -> [B, n_symbols, T]."""
        if mel.ndim == 2:
            mel = mel.unsqueeze(0)
        return self.body(mel)

    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        """Per-frame posteriors [B, T, n_symbols]; rows lie on the simplex."""
        return torch.softmax(self.logits(mel), dim=1).transpose(1, 2)

    def decode(self, mel: torch.Tensor) -> list[list[int]]:
        """Greedy frame labels with repeats collapsed."""
        best = self.logits(mel).argmax(dim=1)
        out = []
        for row in best.tolist():
            collapsed = [s for i, s in enumerate(row) if i == 0 or s != row[i - 1]]
            out.append(collapsed)
        return out
