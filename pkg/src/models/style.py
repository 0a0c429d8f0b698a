"""Style encoder and mapping network with per-domain linear heads."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..config import ModelsConfig
from .layers import LEAKY_SLOPE, ResBlock2d, as_image, check_codes

STYLE_TRUNK_DOWNSAMPLES = 3


class StyleEncoder(nn.Module):
    """Shared convolutional trunk followed by one private linear head per domain.

    Domains are speakers during voice-conversion training and emotions when
    the encoder is trained for emotion conversion.
    """

    def __init__(self, n_domains: int, cfg: ModelsConfig):
        super().__init__()
        self.n_domains = n_domains
        base = cfg.generator_channels
        dims = [base * 2 ** min(i, 2) for i in range(STYLE_TRUNK_DOWNSAMPLES + 1)]
        self.stem = nn.Conv2d(1, base, 3, 1, 1)
        self.blocks = nn.ModuleList(
            [
                ResBlock2d(dims[i], dims[i + 1], downsample="both", normalize=False)
                for i in range(STYLE_TRUNK_DOWNSAMPLES)
            ]
        )
        self.project = nn.Linear(dims[-1], cfg.style_hidden)
        self.heads = nn.ModuleList(
            [nn.Linear(cfg.style_hidden, cfg.style_dim) for _ in range(n_domains)]
        )

    def trunk(self, mel: torch.Tensor) -> torch.Tensor:
        """[B, M, T] -> [B, style_hidden]."""
        x = self.stem(as_image(mel))
        for block in self.blocks:
            x = block(x)
        x = F.leaky_relu(x, LEAKY_SLOPE).mean(dim=(2, 3))
        return F.leaky_relu(self.project(x), LEAKY_SLOPE)

    def heads_of(self, hidden: torch.Tensor) -> torch.Tensor:
        """Every head applied to a trunk output: [B, hidden] -> [B, n_domains, style_dim]."""
        return torch.stack([head(hidden) for head in self.heads], dim=1)

    def all_heads(self, mel: torch.Tensor) -> torch.Tensor:
        return self.heads_of(self.trunk(mel))

    def forward(self, mel: torch.Tensor, code: torch.Tensor) -> torch.Tensor:
        code = check_codes(code, self.n_domains).to(mel.device)
        stacked = self.all_heads(mel)
        return stacked[torch.arange(stacked.shape[0], device=mel.device), code]


class MappingNetwork(nn.Module):
    """Latent draw z -> style vector through a shared MLP and per-domain heads."""

    def __init__(self, n_domains: int, cfg: ModelsConfig):
        super().__init__()
        self.n_domains = n_domains
        self.latent_dim = cfg.latent_dim
        hidden = cfg.style_hidden
        self.shared = nn.Sequential(
            nn.Linear(cfg.latent_dim, hidden),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Linear(hidden, hidden),
            nn.LeakyReLU(LEAKY_SLOPE),
        )
        self.heads = nn.ModuleList(
            [
                nn.Sequential(
                    nn.Linear(hidden, hidden),
                    nn.LeakyReLU(LEAKY_SLOPE),
                    nn.Linear(hidden, cfg.style_dim),
                )
                for _ in range(n_domains)
            ]
        )

    def forward(self, z: torch.Tensor, code: torch.Tensor) -> torch.Tensor:
        code = check_codes(code, self.n_domains).to(z.device)
        hidden = self.shared(z)
        stacked = torch.stack([head(hidden) for head in self.heads], dim=1)
        return stacked[torch.arange(stacked.shape[0], device=z.device), code]

    def sample_latent(self, batch: int, generator: torch.Generator | None = None) -> torch.Tensor:
        return torch.randn(batch, self.latent_dim, generator=generator)
