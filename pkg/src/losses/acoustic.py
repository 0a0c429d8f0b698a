"""Unsupervised acoustic-descriptor consistency between source and conversion."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import torch

from ..descriptors import kernels
from ..descriptors.kinds import DescriptorKind
from ..descriptors.series import DescriptorSeries, retention_mask, window_values
from ..errors import ShapeMismatchError

logger = logging.getLogger(__name__)


def loss_af(
    src_series: DescriptorSeries | Sequence[DescriptorSeries],
    conv_series: DescriptorSeries | Sequence[DescriptorSeries],
) -> torch.Tensor:
    """Mean |AF(src) - AF(conv)| per kind, averaged over kinds with retained windows."""
    if isinstance(src_series, DescriptorSeries):
        src_series = [src_series]
    if isinstance(conv_series, DescriptorSeries):
        conv_series = [conv_series]
    if len(src_series) != len(conv_series):
        raise ShapeMismatchError("source and converted series lists differ in length")

    per_kind = []
    for src, conv in zip(src_series, conv_series, strict=True):
        if src.kind != conv.kind or len(src) != len(conv):
            raise ShapeMismatchError(
                f"series mismatch: {src.kind.value}[{len(src)}] vs {conv.kind.value}[{len(conv)}]"
            )
        if len(src) == 0:
            continue
        per_kind.append((conv.values - src.values).abs().mean())

    if not per_kind:
        reference = conv_series[0].values if conv_series else torch.zeros(0)
        return reference.sum() * 0.0
    return torch.stack(per_kind).mean()


def acoustic_feature_loss(
    src_mel: torch.Tensor,
    conv_mel: torch.Tensor,
    voiced: torch.Tensor,
    kinds: Sequence[DescriptorKind | str],
    center_freqs: np.ndarray | torch.Tensor,
    window_len: int,
    src_f0: torch.Tensor | None = None,
    conv_f0: torch.Tensor | None = None,
    eps: float = kernels.DEFAULT_EPS,
    floor: float = kernels.DEFAULT_FLOOR,
) -> tuple[torch.Tensor, dict[str, int]]:
    """Batched descriptor loss over [B, M, T] mels.

    Windows are retained from the SOURCE voicing ``voiced`` [B, T] only, so
    the retention pattern never depends on the conversion. Returns the loss
    and the number of retained windows per kind.
    """
    retained = retention_mask(voiced, window_len)
    per_kind: list[torch.Tensor] = []
    counts: dict[str, int] = {}
    for kind in map(DescriptorKind.parse, kinds):
        src_values, valid = window_values(
            kind, src_mel, center_freqs, window_len, src_f0, voiced, eps, floor
        )
        conv_values, _ = window_values(
            kind, conv_mel, center_freqs, window_len, conv_f0, voiced, eps, floor
        )
        keep = retained if valid is None else retained & valid
        counts[kind.value] = int(keep.sum())
        if counts[kind.value] == 0:
            continue
        per_kind.append((conv_values - src_values)[keep].abs().mean())

    if not per_kind:
        logger.debug("acoustic feature loss: no retained windows in batch")
        return conv_mel.sum() * 0.0, counts
    return torch.stack(per_kind).mean(), counts
