"""Residual building blocks shared by the networks."""

from __future__ import annotations

import math
from typing import Literal

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import DomainCodeError

Resample = Literal["none", "freq", "both"]

LEAKY_SLOPE = 0.2


def _pool(x: torch.Tensor, mode: Resample) -> torch.Tensor:
    if mode == "freq":
        return F.avg_pool2d(x, kernel_size=(2, 1))
    if mode == "both":
        return F.avg_pool2d(x, kernel_size=2)
    return x


def _upsample(x: torch.Tensor, mode: Resample) -> torch.Tensor:
    if mode == "freq":
        return F.interpolate(x, scale_factor=(2, 1), mode="nearest")
    if mode == "both":
        return F.interpolate(x, scale_factor=2, mode="nearest")
    return x


class ResBlock2d(nn.Module):
    """Pre-activation residual block with optional average-pool downsampling."""

    def __init__(
        self, dim_in: int, dim_out: int, downsample: Resample = "none", normalize: bool = True
    ):
        super().__init__()
        self.downsample = downsample
        self.normalize = normalize
        self.conv1 = nn.Conv2d(dim_in, dim_in, 3, 1, 1)
        self.conv2 = nn.Conv2d(dim_in, dim_out, 3, 1, 1)
        if normalize:
            self.norm1 = nn.InstanceNorm2d(dim_in, affine=True)
            self.norm2 = nn.InstanceNorm2d(dim_in, affine=True)
        self.shortcut = nn.Conv2d(dim_in, dim_out, 1, bias=False) if dim_in != dim_out else None

    def _residual(self, x: torch.Tensor) -> torch.Tensor:
        if self.normalize:
            x = self.norm1(x)
        x = self.conv1(F.leaky_relu(x, LEAKY_SLOPE))
        x = _pool(x, self.downsample)
        if self.normalize:
            x = self.norm2(x)
        return self.conv2(F.leaky_relu(x, LEAKY_SLOPE))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        shortcut = self.shortcut(x) if self.shortcut is not None else x
        shortcut = _pool(shortcut, self.downsample)
        return (shortcut + self._residual(x)) / math.sqrt(2)


class AdaIN(nn.Module):
    """Instance norm whose scale and shift are predicted from a style vector."""

    def __init__(self, style_dim: int, channels: int):
        super().__init__()
        self.norm = nn.InstanceNorm2d(channels, affine=False)
        self.fc = nn.Linear(style_dim, channels * 2)

    def forward(self, x: torch.Tensor, style: torch.Tensor) -> torch.Tensor:
        gamma, beta = self.fc(style).chunk(2, dim=1)
        return (1 + gamma[:, :, None, None]) * self.norm(x) + beta[:, :, None, None]


class AdaINResBlock(nn.Module):
    def __init__(self, dim_in: int, dim_out: int, style_dim: int, upsample: Resample = "none"):
        super().__init__()
        self.upsample = upsample
        self.norm1 = AdaIN(style_dim, dim_in)
        self.conv1 = nn.Conv2d(dim_in, dim_out, 3, 1, 1)
        self.norm2 = AdaIN(style_dim, dim_out)
        self.conv2 = nn.Conv2d(dim_out, dim_out, 3, 1, 1)
        self.shortcut = nn.Conv2d(dim_in, dim_out, 1, bias=False) if dim_in != dim_out else None

    def forward(self, x: torch.Tensor, style: torch.Tensor) -> torch.Tensor:
        shortcut = _upsample(x, self.upsample)
        if self.shortcut is not None:
            shortcut = self.shortcut(shortcut)
        r = F.leaky_relu(self.norm1(x, style), LEAKY_SLOPE)
        r = self.conv1(_upsample(r, self.upsample))
        r = F.leaky_relu(self.norm2(r, style), LEAKY_SLOPE)
        r = self.conv2(r)
        return (shortcut + r) / math.sqrt(2)


def check_codes(code: torch.Tensor, n_domains: int, what: str = "domain") -> torch.Tensor:
    """Validate a batch of integer codes against ``0..n_domains-1``."""
    code = torch.as_tensor(code, dtype=torch.long)
    if code.ndim == 0:
        code = code.unsqueeze(0)
    if code.numel() and (int(code.min()) < 0 or int(code.max()) >= n_domains):
        raise DomainCodeError(
            f"{what} code out of range: got {code.tolist()}, expected 0..{n_domains - 1}"
        )
    return code


def as_image(mel: torch.Tensor) -> torch.Tensor:
    """[B, M, T] -> [B, 1, M, T]; a single [M, T] mel gains a batch axis too."""
    if mel.ndim == 2:
        mel = mel.unsqueeze(0)
    return mel.unsqueeze(1)
