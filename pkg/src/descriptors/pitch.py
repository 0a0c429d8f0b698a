"""Reference pitch tracking and voicing decisions."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import librosa
import numpy as np

from ..audio.types import Waveform
from ..config import MelConfig
from ..errors import AudioFormatError

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class F0Contour:
    """Per-frame F0 in Hz (0 when unvoiced) with a voicing confidence in [0, 1]."""

    f0_hz: np.ndarray
    confidence: np.ndarray

    def __post_init__(self) -> None:
        self.f0_hz = np.asarray(self.f0_hz, dtype=np.float64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        if self.f0_hz.shape != self.confidence.shape:
            raise ValueError("f0_hz and confidence must have the same length")
        if np.any(self.f0_hz < 0):
            raise ValueError("f0_hz must be non-negative")

    @property
    def n_frames(self) -> int:
        return int(self.f0_hz.shape[0])


@dataclass(slots=True)
class VoicingMask:
    voiced: np.ndarray
    source: str = "oracle_f0"

    def __post_init__(self) -> None:
        self.voiced = np.asarray(self.voiced, dtype=bool)

    @property
    def n_frames(self) -> int:
        return int(self.voiced.shape[0])

    @property
    def voiced_fraction(self) -> float:
        return float(self.voiced.mean()) if self.voiced.size else 0.0


def oracle_f0(waveform: Waveform, cfg: MelConfig | None = None) -> F0Contour:
    """Probabilistic YIN pitch track aligned to the mel hop.

    Frames are centred exactly like the mel analysis, so the contour has
    ``n_samples // hop + 1`` frames. Unvoiced frames report 0 Hz.
    """
    cfg = cfg or MelConfig()
    if waveform.sample_rate != cfg.sample_rate:
        raise AudioFormatError(
            f"Pitch tracking expects {cfg.sample_rate} Hz, got {waveform.sample_rate} Hz"
        )
    n_frames = len(waveform) // cfg.hop_length + 1

    if not np.any(waveform.samples):
        return F0Contour(f0_hz=np.zeros(n_frames), confidence=np.zeros(n_frames))

    f0, voiced_flag, voiced_prob = librosa.pyin(
        waveform.samples,
        fmin=cfg.f0_min,
        fmax=cfg.f0_max,
        sr=cfg.sample_rate,
        frame_length=cfg.f0_frame_length,
        hop_length=cfg.hop_length,
        center=True,
        pad_mode="constant",
        fill_na=0.0,
    )
    f0 = np.where(voiced_flag, np.nan_to_num(f0, nan=0.0), 0.0)
    confidence = np.clip(np.nan_to_num(voiced_prob, nan=0.0), 0.0, 1.0)

    # centred framing already matches the mel count; enforce it
    f0 = _fit_length(f0, n_frames)
    confidence = _fit_length(confidence, n_frames)
    logger.debug(f"oracle_f0: {int((f0 > 0).sum())}/{n_frames} voiced frames")
    return F0Contour(f0_hz=f0, confidence=confidence)


def _fit_length(values: np.ndarray, n_frames: int) -> np.ndarray:
    if values.shape[0] >= n_frames:
        return values[:n_frames]
    return np.pad(values, (0, n_frames - values.shape[0]))


def voicing_mask(contour: F0Contour, conf_threshold: float = 0.5) -> VoicingMask:
    """voiced[t] = f0[t] > 0 and confidence[t] >= threshold."""
    if not 0.0 < conf_threshold < 1.0:
        raise ValueError(f"conf_threshold must lie in (0, 1), got {conf_threshold}")
    voiced = (contour.f0_hz > 0.0) & (contour.confidence >= conf_threshold)
    return VoicingMask(voiced=voiced, source="oracle_f0")
