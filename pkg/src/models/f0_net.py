"""Frame-level F0 regressor trained against the reference pitch tracker."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..config import ModelsConfig
from .layers import LEAKY_SLOPE

TRUNK_DILATIONS = (1, 2, 4)


class F0Net(nn.Module):
    """Dilated 1-D convolutions over mel frames.

    The trunk output (before the regression head) is the pitch embedding fed
    to the generator. The head emits a non-negative F0 in Hz per frame.
    """

    def __init__(self, n_mels: int, cfg: ModelsConfig):
        super().__init__()
        channels = cfg.f0_channels
        self.f0_scale = cfg.f0_scale
        layers: list[nn.Module] = []
        dim_in = n_mels
        for dilation in TRUNK_DILATIONS:
            layers += [
                nn.Conv1d(dim_in, channels, 5, padding=2 * dilation, dilation=dilation),
                nn.LeakyReLU(LEAKY_SLOPE),
            ]
            dim_in = channels
        self.trunk = nn.Sequential(*layers)
        self.head = nn.Conv1d(channels, 1, 1)

    def forward(self, mel: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """[B, M, T] log-mel -> (f0 [B, T] in Hz, pitch embedding [B, C, T])."""
        if mel.ndim == 2:
            mel = mel.unsqueeze(0)
        features = self.trunk(mel)
        f0 = F.softplus(self.head(features)).squeeze(1) * self.f0_scale
        return f0, features
