"""Array-carrying records shared by the front end and the networks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(slots=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("Waveform samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("Waveform contains non-finite samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(slots=True)
class MelSpectrogram:
    """Log-mel matrix [n_mels x n_frames] (natural log, floored)."""

    values: np.ndarray
    mel_center_freqs: np.ndarray
    hop_seconds: float

    @property
    def n_mels(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[1])


@dataclass(slots=True)
class WindowSequence:
    """Frame-index ranges [start, end) advancing by half a window."""

    windows: list[tuple[int, int]] = field(default_factory=list)
    window_len: int = 8
    overlap: float = 0.5

    @property
    def hop(self) -> int:
        return self.window_len // 2

    def __len__(self) -> int:
        return len(self.windows)

    def starts(self) -> list[int]:
        return [start for start, _ in self.windows]
