"""Deterministic audio front end: I/O, log-mel analysis, manifests and the toy corpus."""

from .io import load_waveform, peak_normalize, resample, save_waveform
from .manifest import (
    DatasetManifest,
    ManifestEntry,
    load_manifest,
    split_manifest,
    write_manifest,
)
from .mel import MelFrontEnd, frame_windows, log_mel_spectrogram, mel_to_waveform
from .toy import PHONES, ToySpec, make_toy_corpus, synthesize_toy_utterance, toy_speakers
from .types import MelSpectrogram, Waveform, WindowSequence

__all__ = [
    "PHONES",
    "DatasetManifest",
    "ManifestEntry",
    "MelFrontEnd",
    "MelSpectrogram",
    "ToySpec",
    "Waveform",
    "WindowSequence",
    "frame_windows",
    "load_manifest",
    "load_waveform",
    "log_mel_spectrogram",
    "make_toy_corpus",
    "mel_to_waveform",
    "peak_normalize",
    "resample",
    "save_waveform",
    "split_manifest",
    "synthesize_toy_utterance",
    "toy_speakers",
    "write_manifest",
]
