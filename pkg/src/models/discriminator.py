"""One architecture, three roles: realness discriminator, source-speaker and emotion classifiers."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..config import ModelsConfig
from .layers import LEAKY_SLOPE, ResBlock2d, as_image, check_codes

DISC_DOWNSAMPLES = 3


class DomainClassifier(nn.Module):
    """Convolutional trunk with ``n_outputs`` logits.

    As the discriminator, output ``k`` is the realness logit for domain ``k``;
    as a classifier, the outputs are class logits.
    """

    def __init__(self, n_outputs: int, cfg: ModelsConfig):
        super().__init__()
        self.n_outputs = n_outputs
        base = cfg.disc_channels
        dims = [base * 2 ** min(i, 1) for i in range(DISC_DOWNSAMPLES + 1)]
        self.stem = nn.Conv2d(1, base, 3, 1, 1)
        self.blocks = nn.ModuleList(
            [
                ResBlock2d(dims[i], dims[i + 1], downsample="both", normalize=False)
                for i in range(DISC_DOWNSAMPLES)
            ]
        )
        self.head = nn.Linear(dims[-1], n_outputs)

    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        x = self.stem(as_image(mel))
        for block in self.blocks:
            x = block(x)
        x = F.leaky_relu(x, LEAKY_SLOPE).mean(dim=(2, 3))
        return self.head(x)

    def discriminate(self, mel: torch.Tensor, code: torch.Tensor) -> torch.Tensor:
        """Realness logit of each batch member for its own domain code: [B]."""
        code = check_codes(code, self.n_outputs).to(mel.device)
        logits = self(mel)
        return logits[torch.arange(logits.shape[0], device=mel.device), code]

    def distribution(self, mel: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self(mel), dim=-1)
