"""Waveform I/O and resampling."""

from __future__ import annotations

import logging
from pathlib import Path

import librosa
import numpy as np
import soundfile as sf

from ..errors import AudioFormatError
from .types import Waveform

logger = logging.getLogger(__name__)

PCM_SUBTYPES = ("PCM_16", "PCM_24", "PCM_32", "PCM_U8", "PCM_S8")
INT16_SCALE = 32768.0


def load_waveform(path: str | Path, channel: int = 0) -> Waveform:
    """Load a PCM WAV file as a normalized mono waveform.

    Multi-channel files are reduced to ``channel``. The native sample rate is
    kept; call :func:`resample` to move to the analysis rate.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Audio file not found: {path}")

    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise AudioFormatError(f"Unreadable audio file {path}: {e}") from e

    if info.format != "WAV" or info.subtype not in PCM_SUBTYPES:
        raise AudioFormatError(
            f"Unsupported encoding for {path}: {info.format}/{info.subtype} (PCM WAV expected)"
        )

    data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    if data.shape[0] == 0:
        raise AudioFormatError(f"Zero-length audio: {path}")
    if channel >= data.shape[1]:
        raise AudioFormatError(
            f"{path} has {data.shape[1]} channel(s), channel {channel} requested"
        )

    return Waveform(samples=np.clip(data[:, channel], -1.0, 1.0), sample_rate=int(sample_rate))


def save_waveform(waveform: Waveform, path: str | Path) -> Path:
    """Write a waveform as 16-bit PCM WAV.

    Quantization uses the same 1/32768 scale as the reader, so reading back a
    file written here gives the identical sample sequence.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    quantized = np.clip(np.round(waveform.samples * INT16_SCALE), -32768, 32767).astype(np.int16)
    sf.write(str(path), quantized, waveform.sample_rate, subtype="PCM_16", format="WAV")
    return path


def resample(waveform: Waveform, target_rate: int) -> Waveform:
    """Band-limited resampling; duration is preserved within one sample period."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == waveform.sample_rate:
        return Waveform(samples=waveform.samples.copy(), sample_rate=waveform.sample_rate)

    logger.debug(f"Resampling {waveform.sample_rate} Hz -> {target_rate} Hz")
    samples = librosa.resample(
        waveform.samples,
        orig_sr=waveform.sample_rate,
        target_sr=target_rate,
        res_type="soxr_vhq",
    )
    return Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=target_rate)


def peak_normalize(waveform: Waveform, peak: float = 0.95) -> Waveform:
    """Scale so that max |sample| equals ``peak`` (silence is returned unchanged)."""
    current = float(np.max(np.abs(waveform.samples))) if len(waveform) else 0.0
    if current == 0.0:
        return waveform
    return Waveform(samples=waveform.samples * (peak / current), sample_rate=waveform.sample_rate)
