"""Toy emotional speech corpus.

Utterances are additive harmonic vowels shaped by three-formant envelopes,
band-passed noise fricatives and short silences. Emotion archetypes differ
only in prosody (pitch register, contour movement, loudness, spectral tilt
and tempo) so arousal-related descriptors separate them; speaker archetypes
differ in pitch register and vocal-tract length.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field
from scipy import signal

from ..config import EMOTIONS
from .io import save_waveform
from .manifest import ManifestEntry, split_manifest, write_manifest
from .types import Waveform

logger = logging.getLogger(__name__)

SILENCE = "_"
VOWELS = ("a", "e", "i", "o", "u", "y", "E", "O")
FRICATIVES = ("s", "f", "h")
PHONES: tuple[str, ...] = (SILENCE, *VOWELS, *FRICATIVES)

# adult male reference formants (F1, F2, F3) in Hz
VOWEL_FORMANTS: dict[str, tuple[float, float, float]] = {
    "a": (730.0, 1090.0, 2440.0),
    "e": (530.0, 1840.0, 2480.0),
    "i": (270.0, 2290.0, 3010.0),
    "o": (570.0, 840.0, 2410.0),
    "u": (300.0, 870.0, 2240.0),
    "y": (440.0, 1020.0, 2240.0),
    "E": (660.0, 1720.0, 2410.0),
    "O": (490.0, 910.0, 2450.0),
}

# pass band in Hz and level relative to the voiced rms
FRICATIVE_BANDS: dict[str, tuple[float, float, float]] = {
    "s": (4000.0, 9000.0, 0.35),
    "f": (1500.0, 6000.0, 0.2),
    "h": (400.0, 3500.0, 0.12),
}

ACCENT_SHIFTS: dict[str, dict[str, tuple[float, float, float]]] = {
    "british": {},
    "american": {
        "a": (0.95, 1.1, 1.0),
        "O": (1.08, 1.05, 1.0),
        "o": (1.0, 1.12, 1.0),
        "E": (0.92, 1.06, 1.0),
    },
}

FORMANT_GAINS = np.array([1.0, 0.55, 0.3])
FORMANT_BANDWIDTHS = np.array([80.0, 120.0, 170.0])


class F0ContourParams(BaseModel):
    """Pitch contour: base register, linear drift, vibrato and slow jitter (semitones)."""

    base_hz: float = Field(..., ge=70.0, le=400.0)
    drift_semitones: float = Field(default=0.0)
    vibrato_rate_hz: float = Field(default=4.0, ge=0.0)
    vibrato_depth_semitones: float = Field(default=0.2, ge=0.0)
    jitter_semitones: float = Field(default=0.2, ge=0.0)


class LoudnessEnvelope(BaseModel):
    rms: float = Field(..., gt=0.0, le=0.3)
    tremolo_rate_hz: float = Field(default=5.0, ge=0.0)
    tremolo_depth: float = Field(default=0.0, ge=0.0, lt=1.0)
    spectral_tilt: float = Field(default=1.2, ge=0.0, description="Roll-off exponent above 1 kHz")


class EmotionArchetype(BaseModel):
    """Prosodic signature of one emotion class."""

    name: str
    f0_factor: float = Field(default=1.0, gt=0.0)
    contour: F0ContourParams
    loudness: LoudnessEnvelope
    tempo: float = Field(default=1.0, gt=0.0)


class SpeakerArchetype(BaseModel):
    speaker_id: str
    gender: str = Field(..., pattern="^[MF]$")
    accent: str = Field(default="british")
    base_f0: float = Field(..., ge=70.0, le=400.0)
    formant_scale: float = Field(default=1.0, gt=0.0)


# name: f0 factor, drift, vibrato rate, vibrato depth, jitter, rms, tremolo, tilt, tempo
_ARCHETYPE_TABLE: dict[str, tuple[float, ...]] = {
    "neutral": (1.0, 0.0, 4.0, 0.15, 0.2, 0.05, 0.0, 1.2, 1.0),
    "sad": (0.88, -1.5, 3.0, 0.2, 0.2, 0.02, 0.0, 1.8, 0.8),
    "happy": (1.2, 1.0, 5.0, 1.2, 0.8, 0.08, 0.1, 0.9, 1.15),
    "anger": (1.12, -1.0, 6.0, 1.6, 1.0, 0.13, 0.05, 0.5, 1.2),
    "surprise": (1.3, 6.0, 4.5, 1.0, 0.8, 0.08, 0.05, 1.0, 1.0),
}


def _archetype(name: str, row: tuple[float, ...]) -> EmotionArchetype:
    factor, drift, rate, depth, jitter, rms, tremolo, tilt, tempo = row
    return EmotionArchetype(
        name=name,
        f0_factor=factor,
        contour=F0ContourParams(
            base_hz=100.0,
            drift_semitones=drift,
            vibrato_rate_hz=rate,
            vibrato_depth_semitones=depth,
            jitter_semitones=jitter,
        ),
        loudness=LoudnessEnvelope(rms=rms, tremolo_depth=tremolo, spectral_tilt=tilt),
        tempo=tempo,
    )


EMOTION_ARCHETYPES: dict[str, EmotionArchetype] = {
    name: _archetype(name, row) for name, row in _ARCHETYPE_TABLE.items()
}


def toy_speakers(n_speakers: int = 4) -> list[SpeakerArchetype]:
    """Alternating male/female speakers; the accent flips every second pair."""
    speakers = []
    for index in range(n_speakers):
        gender = "M" if index % 2 == 0 else "F"
        rank = index // 2
        base_f0 = (105.0 if gender == "M" else 190.0) + 14.0 * rank
        scale = (1.0 if gender == "M" else 1.16) + 0.04 * rank
        speakers.append(
            SpeakerArchetype(
                speaker_id=str(index),
                gender=gender,
                accent="british" if rank % 2 == 0 else "american",
                base_f0=min(base_f0, 260.0),
                formant_scale=scale,
            )
        )
    return speakers


class ToySpec(BaseModel):
    """Everything needed to render one toy utterance."""

    f0_contour_params: F0ContourParams
    formant_set: dict[str, tuple[float, float, float]]
    loudness_envelope: LoudnessEnvelope
    emotion_archetype: str
    speaker_archetype: SpeakerArchetype
    duration_s: float = Field(default=2.5, ge=1.0, le=4.0)
    tempo: float = Field(default=1.0, gt=0.0)

    @classmethod
    def from_archetypes(
        cls, speaker: SpeakerArchetype, emotion: str, duration_s: float = 2.5
    ) -> ToySpec:
        archetype = EMOTION_ARCHETYPES[emotion]
        base = float(np.clip(speaker.base_f0 * archetype.f0_factor, 70.0, 400.0))
        shifts = ACCENT_SHIFTS.get(speaker.accent, {})
        formants = {
            vowel: tuple(
                float(f * speaker.formant_scale * s)
                for f, s in zip(triple, shifts.get(vowel, (1.0, 1.0, 1.0)), strict=True)
            )
            for vowel, triple in VOWEL_FORMANTS.items()
        }
        return cls(
            f0_contour_params=archetype.contour.model_copy(update={"base_hz": base}),
            formant_set=formants,
            loudness_envelope=archetype.loudness,
            emotion_archetype=emotion,
            speaker_archetype=speaker,
            duration_s=duration_s,
            tempo=archetype.tempo,
        )


@dataclass(slots=True)
class ToyUtterance:
    waveform: Waveform
    speaker_id: str
    emotion_label: str
    transcript: str
    frame_labels: np.ndarray


def _phone_sequence(
    rng: np.random.Generator, n_samples: int, sample_rate: int, tempo: float
) -> list[tuple[str, int]]:
    edge = int(0.12 * sample_rate)
    segments: list[tuple[str, int]] = [(SILENCE, edge)]
    used = edge
    previous = SILENCE
    budget = n_samples - edge
    while used < budget:
        if previous in VOWELS and rng.random() < 0.45:
            choices = [p for p in FRICATIVES if p != previous]
            phone = str(rng.choice(choices))
            seconds = rng.uniform(0.06, 0.12)
        else:
            choices = [p for p in VOWELS if p != previous]
            phone = str(rng.choice(choices))
            seconds = rng.uniform(0.14, 0.26)
        length = min(int(seconds * sample_rate / tempo), budget - used)
        if length <= 0:
            break
        segments.append((phone, length))
        used += length
        previous = phone
    segments.append((SILENCE, n_samples - used))
    return [(p, n) for p, n in segments if n > 0]


def _smooth_gate(mask: np.ndarray, sample_rate: int) -> np.ndarray:
    ramp = signal.windows.hann(max(3, int(0.012 * sample_rate)))
    return np.convolve(mask.astype(np.float64), ramp / ramp.sum(), mode="same")


def _f0_track(params: F0ContourParams, t: np.ndarray, duration: float, rng: np.random.Generator):
    semitones = params.drift_semitones * (t / duration)
    semitones += params.vibrato_depth_semitones * np.sin(
        2 * np.pi * params.vibrato_rate_hz * t + rng.uniform(0, 2 * np.pi)
    )
    for _ in range(3):
        rate = rng.uniform(0.5, 3.0)
        semitones += (params.jitter_semitones / 3.0) * np.sin(
            2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi)
        )
    return np.clip(params.base_hz * 2.0 ** (semitones / 12.0), 72.0, 390.0)


def synthesize_toy_utterance(
    spec: ToySpec, seed: int, sample_rate: int = 24000, hop_length: int = 300
) -> ToyUtterance:
    """Render one utterance; deterministic in ``(spec, seed)``."""
    rng = np.random.default_rng(seed)
    n = int(round(spec.duration_s * sample_rate))
    t = np.arange(n) / sample_rate

    segments = _phone_sequence(rng, n, sample_rate, spec.tempo)
    phone_of_sample = np.concatenate(
        [np.full(length, PHONES.index(phone), dtype=np.int64) for phone, length in segments]
    )

    base = spec.f0_contour_params.base_hz
    params = spec.f0_contour_params.model_copy(
        update={
            "base_hz": float(np.clip(base * rng.uniform(0.96, 1.04), 70.0, 400.0)),
            "drift_semitones": spec.f0_contour_params.drift_semitones + rng.normal(0.0, 0.2),
        }
    )
    f0 = _f0_track(params, t, spec.duration_s, rng)
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate

    formants = np.zeros((n, 3))
    for index, phone in enumerate(PHONES):
        if phone in spec.formant_set:
            formants[phone_of_sample == index] = spec.formant_set[phone]
    voiced = np.isin(phone_of_sample, [PHONES.index(v) for v in VOWELS])

    # harmonics up to 8 kHz, each weighted by the formant envelope at k*f0
    tilt = spec.loudness_envelope.spectral_tilt
    n_harmonics = int(8000.0 / f0.min())
    bandwidths = FORMANT_BANDWIDTHS * spec.speaker_archetype.formant_scale
    harmonic = np.zeros(n)
    for k in range(1, n_harmonics + 1):
        freq = k * f0
        env = (
            FORMANT_GAINS / (1.0 + ((freq[:, None] - formants) / bandwidths) ** 2)
        ).sum(axis=1)
        env *= (1.0 + freq / 1000.0) ** (-tilt)
        env[freq >= 0.45 * sample_rate] = 0.0
        harmonic += env * np.sin(k * phase)

    target_rms = spec.loudness_envelope.rms * rng.uniform(0.85, 1.15)
    gate = _smooth_gate(voiced, sample_rate)
    voiced_part = harmonic * gate
    current = np.sqrt(np.mean(voiced_part[voiced] ** 2)) if voiced.any() else 0.0
    if current > 0:
        voiced_part *= target_rms / current

    noise = np.zeros(n)
    nyquist = sample_rate / 2
    for phone, (low, high, level) in FRICATIVE_BANDS.items():
        mask = phone_of_sample == PHONES.index(phone)
        if not mask.any():
            continue
        band_edges = [low / nyquist, min(high, 0.95 * nyquist) / nyquist]
        sos = signal.butter(4, band_edges, btype="bandpass", output="sos")
        band = signal.sosfilt(sos, rng.standard_normal(n))
        band /= np.sqrt(np.mean(band**2)) + 1e-12
        noise += level * target_rms * band * _smooth_gate(mask, sample_rate)

    tremolo = 1.0 + spec.loudness_envelope.tremolo_depth * np.sin(
        2 * np.pi * spec.loudness_envelope.tremolo_rate_hz * t
    )
    samples = (voiced_part + noise) * tremolo + 1e-4 * rng.standard_normal(n)
    waveform = Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=sample_rate)

    n_frames = n // hop_length + 1
    frame_labels = phone_of_sample[np.minimum(np.arange(n_frames) * hop_length, n - 1)]
    transcript = "".join(phone for phone, _ in segments)

    return ToyUtterance(
        waveform=waveform,
        speaker_id=spec.speaker_archetype.speaker_id,
        emotion_label=spec.emotion_archetype,
        transcript=transcript,
        frame_labels=frame_labels,
    )


def clip_seed(seed: int, speaker_index: int, emotion_index: int, clip_index: int) -> int:
    return seed * 100_003 + speaker_index * 1_009 + emotion_index * 101 + clip_index


def make_toy_corpus(
    out_dir: str | Path,
    n_speakers: int = 4,
    clips_per_pair: int = 5,
    duration_s: float = 2.5,
    seed: int = 0,
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    sample_rate: int = 24000,
    hop_length: int = 300,
) -> Path:
    """Write WAVs, per-frame phone labels and ``manifest.jsonl``; returns the manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)

    entries: list[ManifestEntry] = []
    for s_index, speaker in enumerate(toy_speakers(n_speakers)):
        for e_index, emotion in enumerate(EMOTIONS):
            spec = ToySpec.from_archetypes(speaker, emotion, duration_s)
            for k in range(clips_per_pair):
                utt = synthesize_toy_utterance(
                    spec, clip_seed(seed, s_index, e_index, k), sample_rate, hop_length
                )
                stem = f"spk{speaker.speaker_id}_{emotion}_{k:02d}"
                save_waveform(utt.waveform, out_dir / "wavs" / f"{stem}.wav")
                np.save(out_dir / "labels" / f"{stem}.npy", utt.frame_labels)
                entries.append(
                    ManifestEntry(
                        audio_path=f"wavs/{stem}.wav",
                        speaker_id=speaker.speaker_id,
                        emotion_label=emotion,
                        gender=speaker.gender,
                        accent=speaker.accent,
                        transcript=utt.transcript,
                        labels_path=f"labels/{stem}.npy",
                    )
                )

    entries = split_manifest(entries, split_ratios, seed=seed)
    manifest_path = write_manifest(entries, out_dir / "manifest.jsonl")
    logger.info(f"Wrote toy corpus: {len(entries)} clips, {n_speakers} speakers -> {manifest_path}")
    return manifest_path
