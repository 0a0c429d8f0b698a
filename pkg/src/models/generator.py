"""Mel-to-mel generator conditioned on pitch features and a style vector."""

from __future__ import annotations

import logging

import torch
import torch.nn.functional as F
from torch import nn

from ..config import ModelsConfig
from ..errors import ShapeMismatchError
from .layers import LEAKY_SLOPE, AdaINResBlock, ResBlock2d, as_image

logger = logging.getLogger(__name__)

F0_PROJECTION_CHANNELS = 16


class Generator(nn.Module):
    """Encoder / AdaIN decoder over the mel "image".

    Downsampling acts on the frequency axis only, so the output always has the
    input's frame count. Pitch features (the F0 network's trunk output) are
    projected onto the bottleneck grid and concatenated before decoding. With
    ``use_f0=False`` the pitch path is absent (emotion-conversion pre-training).
    """

    def __init__(self, n_mels: int, cfg: ModelsConfig, use_f0: bool = True):
        super().__init__()
        if n_mels % (2**cfg.n_down):
            raise ValueError(f"n_mels={n_mels} must be divisible by 2**n_down={2**cfg.n_down}")
        self.n_mels = n_mels
        self.use_f0 = use_f0
        self.style_dim = cfg.style_dim
        self.bottleneck_height = n_mels // 2**cfg.n_down

        base = cfg.generator_channels
        dims = [base * 2**i for i in range(cfg.n_down + 1)]
        self.stem = nn.Conv2d(1, base, 3, 1, 1)
        self.encoder = nn.ModuleList(
            [ResBlock2d(dims[i], dims[i + 1], downsample="freq") for i in range(cfg.n_down)]
        )
        self.bottleneck = nn.ModuleList([ResBlock2d(dims[-1], dims[-1]) for _ in range(2)])

        f0_channels = F0_PROJECTION_CHANNELS if use_f0 else 0
        if use_f0:
            self.f0_projection = nn.Conv1d(
                cfg.f0_channels, F0_PROJECTION_CHANNELS * self.bottleneck_height, 1
            )
        self.decoder = nn.ModuleList(
            [AdaINResBlock(dims[-1] + f0_channels, dims[-1], cfg.style_dim)]
            + [
                AdaINResBlock(dims[i + 1], dims[i], cfg.style_dim, upsample="freq")
                for i in reversed(range(cfg.n_down))
            ]
        )
        self.out_norm = nn.InstanceNorm2d(base, affine=True)
        self.out_conv = nn.Conv2d(base, 1, 1)

    def forward(
        self, mel: torch.Tensor, f0_features: torch.Tensor | None, style: torch.Tensor
    ) -> torch.Tensor:
        """[B, M, T] mel, [B, C_f, T] pitch features, [B, style_dim] style -> [B, M, T]."""
        if style.shape[-1] != self.style_dim:
            raise ShapeMismatchError(
                f"style has width {style.shape[-1]}, expected {self.style_dim}"
            )
        x = self.stem(as_image(mel))
        for block in self.encoder:
            x = block(x)
        for block in self.bottleneck:
            x = block(x)

        if self.use_f0:
            if f0_features is None:
                raise ShapeMismatchError("pitch-conditioned generator needs f0_features")
            if f0_features.shape[-1] != x.shape[-1]:
                raise ShapeMismatchError(
                    f"pitch features have {f0_features.shape[-1]} frames, mel has {x.shape[-1]}"
                )
            pitch = self.f0_projection(f0_features)
            pitch = pitch.view(x.shape[0], F0_PROJECTION_CHANNELS, self.bottleneck_height, -1)
            x = torch.cat([x, pitch], dim=1)

        for block in self.decoder:
            x = block(x, style)
        x = self.out_conv(F.leaky_relu(self.out_norm(x), LEAKY_SLOPE))
        return x.squeeze(1)
