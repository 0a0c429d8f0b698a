"""Per-window descriptor series over the voiced part of an utterance."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..audio.mel import frame_windows
from ..audio.types import MelSpectrogram, WindowSequence
from . import kernels
from .kinds import DescriptorKind
from .pitch import VoicingMask

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = ["utterance", "window", "kind", "value"]


@dataclass(slots=True)
class DescriptorSeries:
    """One value per retained window; ``window_map`` lists those windows."""

    kind: DescriptorKind
    values: torch.Tensor
    window_map: WindowSequence
    window_indices: list[int]

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_empty(self) -> bool:
        return len(self) == 0


def retention_mask(voiced: torch.Tensor, window_len: int) -> torch.Tensor:
    """Windows with at least half of their frames voiced: [..., T] -> [..., n_windows]."""
    counts = kernels.unfold_windows(voiced.to(torch.int64), window_len).sum(dim=-1)
    return counts * 2 >= window_len


def retained_windows(
    mask: VoicingMask, windows: WindowSequence
) -> tuple[WindowSequence, list[int]]:
    kept, indices = [], []
    for index, (start, stop) in enumerate(windows.windows):
        if np.count_nonzero(mask.voiced[start:stop]) * 2 >= (stop - start):
            kept.append((start, stop))
            indices.append(index)
    restricted = WindowSequence(
        windows=kept, window_len=windows.window_len, overlap=windows.overlap
    )
    return restricted, indices


def window_values(
    kind: DescriptorKind,
    log_mel: torch.Tensor,
    center_freqs: np.ndarray | torch.Tensor,
    window_len: int,
    f0: torch.Tensor | None = None,
    voiced: torch.Tensor | None = None,
    eps: float = kernels.DEFAULT_EPS,
    floor: float = kernels.DEFAULT_FLOOR,
) -> tuple[torch.Tensor, torch.Tensor | None]:
    """Descriptor value on every window of a [..., M, T] log-mel.

    Returns the values [..., n_windows] and, for DeltaF0 only, a validity mask
    marking windows with at least two voiced frames.
    """
    if kind is DescriptorKind.DELTA_F0:
        if f0 is None or voiced is None:
            raise ValueError("delta_f0 needs both an F0 track and a voicing mask")
        return kernels.delta_f0(
            kernels.unfold_windows(f0, window_len), kernels.unfold_windows(voiced, window_len)
        )

    windows = kernels.mel_windows(log_mel, window_len)
    if kind is DescriptorKind.SPECTRAL_CENTROID:
        return kernels.spectral_centroid(windows, center_freqs, eps), None
    if kind is DescriptorKind.SPECTRAL_KURTOSIS:
        return kernels.spectral_kurtosis(windows, center_freqs, eps), None
    if kind is DescriptorKind.LOUDNESS:
        return kernels.loudness(windows, center_freqs, floor), None
    raise ValueError(f"Unsupported descriptor kind: {kind}")


def descriptor_series(
    kind: DescriptorKind | str,
    mel: MelSpectrogram | torch.Tensor,
    mask: VoicingMask,
    windows: WindowSequence | None = None,
    f0: torch.Tensor | np.ndarray | None = None,
    center_freqs: np.ndarray | None = None,
    window_len: int = 8,
    eps: float = kernels.DEFAULT_EPS,
    floor: float = kernels.DEFAULT_FLOOR,
) -> DescriptorSeries:
    """Apply one descriptor kernel to every retained voiced window.

    ``mel`` may be a :class:`MelSpectrogram` or a [M, T] log-mel tensor (which
    keeps the autograd path). The mask always comes from the source utterance.
    """
    kind = DescriptorKind.parse(kind)
    if isinstance(mel, MelSpectrogram):
        center_freqs = mel.mel_center_freqs if center_freqs is None else center_freqs
        log_mel = torch.from_numpy(np.asarray(mel.values, dtype=np.float64))
    else:
        if center_freqs is None:
            raise ValueError("center_freqs is required for tensor input")
        log_mel = mel

    n_frames = int(log_mel.shape[-1])
    if mask.n_frames != n_frames:
        raise ValueError(f"mask has {mask.n_frames} frames, mel has {n_frames}")
    if windows is None:
        windows = frame_windows(n_frames, window_len)
    kept, indices = retained_windows(mask, windows)

    if kind is DescriptorKind.DELTA_F0:
        if f0 is None:
            raise ValueError("delta_f0 needs an F0 track")
        f0_t = torch.as_tensor(f0, dtype=log_mel.dtype)
        voiced_t = torch.from_numpy(mask.voiced)
        if not kept.windows:
            values = log_mel.new_zeros(0)
        else:
            frames = torch.stack([torch.arange(a, b) for a, b in kept.windows])
            values, valid = kernels.delta_f0(f0_t[frames], voiced_t[frames])
            keep = valid.tolist()
            values = values[valid]
            kept = WindowSequence(
                windows=[w for w, k in zip(kept.windows, keep, strict=True) if k],
                window_len=kept.window_len,
                overlap=kept.overlap,
            )
            indices = [i for i, k in zip(indices, keep, strict=True) if k]
    elif not kept.windows:
        values = log_mel.new_zeros(0)
    else:
        energy = torch.exp(log_mel)
        stack = torch.stack([energy[:, a:b] for a, b in kept.windows])
        if kind is DescriptorKind.SPECTRAL_CENTROID:
            values = kernels.spectral_centroid(stack, center_freqs, eps)
        elif kind is DescriptorKind.SPECTRAL_KURTOSIS:
            values = kernels.spectral_kurtosis(stack, center_freqs, eps)
        else:
            values = kernels.loudness(stack, center_freqs, floor)

    if len(indices) == 0:
        logger.debug(f"{kind.value}: no retained windows")
    return DescriptorSeries(kind=kind, values=values, window_map=kept, window_indices=indices)


def feature_table(utterance_id: str, series: list[DescriptorSeries]) -> list[dict[str, object]]:
    """Rows (utterance, window index, kind, value) for the feature dump."""
    rows = []
    for s in series:
        values = s.values.detach().cpu().numpy().tolist()
        for index, value in zip(s.window_indices, values, strict=True):
            rows.append(
                {"utterance": utterance_id, "window": index, "kind": s.kind.value, "value": value}
            )
    return rows


def write_feature_table(rows: list[dict[str, object]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=FEATURE_COLUMNS, delimiter="\t")
        writer.writeheader()
        writer.writerows(rows)
    return path
