"""Log-mel analysis, descriptor windowing and phase-reconstruction synthesis."""

from __future__ import annotations

import logging
from functools import cached_property

import librosa
import numpy as np

from ..config import MelConfig
from ..errors import AudioFormatError
from .types import MelSpectrogram, Waveform, WindowSequence

logger = logging.getLogger(__name__)


class MelFrontEnd:
    """Log-mel extractor bound to one :class:`MelConfig`.

    The filterbank and the band center frequencies are computed once and
    shared by the networks, the descriptor kernels and the vocoder fallback.
    """

    def __init__(self, cfg: MelConfig | None = None):
        self.cfg = cfg or MelConfig()

    @cached_property
    def mel_basis(self) -> np.ndarray:
        return librosa.filters.mel(
            sr=self.cfg.sample_rate,
            n_fft=self.cfg.n_fft,
            n_mels=self.cfg.n_mels,
            fmin=self.cfg.f_min,
            fmax=self.cfg.f_max,
            dtype=np.float64,
        )

    @cached_property
    def center_freqs(self) -> np.ndarray:
        # band i peaks at the (i+1)-th of n_mels+2 equally mel-spaced edges
        edges = librosa.mel_frequencies(
            n_mels=self.cfg.n_mels + 2, fmin=self.cfg.f_min, fmax=self.cfg.f_max
        )
        return edges[1:-1].astype(np.float64)

    @property
    def hop_seconds(self) -> float:
        return self.cfg.hop_length / self.cfg.sample_rate

    def n_frames(self, n_samples: int) -> int:
        return n_samples // self.cfg.hop_length + 1

    def power_spectrogram(self, samples: np.ndarray) -> np.ndarray:
        stft = librosa.stft(
            np.asarray(samples, dtype=np.float64),
            n_fft=self.cfg.n_fft,
            hop_length=self.cfg.hop_length,
            win_length=self.cfg.win_length,
            window="hann",
            center=True,
            pad_mode="constant",
        )
        return np.abs(stft) ** 2

    def log_mel(self, waveform: Waveform) -> MelSpectrogram:
        """ln(max(mel energy, floor)) with shape [n_mels x (n_samples // hop + 1)]."""
        if waveform.sample_rate != self.cfg.sample_rate:
            raise AudioFormatError(
                f"Waveform at {waveform.sample_rate} Hz, mel analysis expects "
                f"{self.cfg.sample_rate} Hz (resample first)"
            )
        if len(waveform) < self.cfg.win_length:
            raise AudioFormatError(
                f"Waveform of {len(waveform)} samples is shorter than one analysis window "
                f"({self.cfg.win_length} samples)"
            )
        energy = self.mel_basis @ self.power_spectrogram(waveform.samples)
        values = np.log(np.maximum(energy, self.cfg.floor))
        return MelSpectrogram(
            values=values, mel_center_freqs=self.center_freqs, hop_seconds=self.hop_seconds
        )

    def to_waveform(self, mel: MelSpectrogram | np.ndarray, seed: int = 0) -> Waveform:
        """Griffin-Lim reconstruction through the pseudo-inverse filterbank."""
        values = mel.values if isinstance(mel, MelSpectrogram) else np.asarray(mel)
        energy = np.exp(values)
        power = np.maximum(np.linalg.pinv(self.mel_basis) @ energy, 0.0)
        n_samples = (values.shape[1] - 1) * self.cfg.hop_length
        samples = librosa.griffinlim(
            np.sqrt(power),
            n_iter=self.cfg.griffin_lim_iters,
            hop_length=self.cfg.hop_length,
            win_length=self.cfg.win_length,
            n_fft=self.cfg.n_fft,
            window="hann",
            center=True,
            pad_mode="constant",
            length=n_samples,
            random_state=seed,
        )
        return Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=self.cfg.sample_rate)


def log_mel_spectrogram(waveform: Waveform, cfg: MelConfig | None = None) -> MelSpectrogram:
    return MelFrontEnd(cfg).log_mel(waveform)


def frame_windows(n_frames: int, window_len: int) -> WindowSequence:
    """50%-overlapping windows over ``n_frames``; the trailing partial window is dropped."""
    if window_len < 2 or window_len % 2:
        raise ValueError(f"window_len must be even and >= 2, got {window_len}")
    hop = window_len // 2
    windows = [(start, start + window_len) for start in range(0, n_frames - window_len + 1, hop)]
    return WindowSequence(windows=windows, window_len=window_len, overlap=0.5)


def mel_to_waveform(mel: MelSpectrogram, cfg: MelConfig | None = None, seed: int = 0) -> Waveform:
    return MelFrontEnd(cfg).to_waveform(mel, seed=seed)
