"""Training clips: log-mel, oracle pitch, voicing and labels with seeded fixed-length crops."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..audio.io import load_waveform, resample
from ..audio.manifest import DatasetManifest, ManifestEntry
from ..audio.mel import MelFrontEnd
from ..config import Config
from ..descriptors.pitch import F0Contour, oracle_f0, voicing_mask
from ..errors import DatasetError

logger = logging.getLogger(__name__)

NO_LABEL = -1


@dataclass(slots=True)
class Clip:
    utt_id: str
    mel: np.ndarray
    f0: np.ndarray
    voiced: np.ndarray
    speaker_code: int
    emotion_code: int
    phones: np.ndarray | None = None

    @property
    def n_frames(self) -> int:
        return int(self.mel.shape[1])


@dataclass(slots=True)
class Batch:
    """Tensors of one training batch: mel [B, M, T], f0/voiced/phones [B, T], codes [B]."""

    mel: torch.Tensor
    f0: torch.Tensor
    voiced: torch.Tensor
    speaker: torch.Tensor
    emotion: torch.Tensor
    phones: torch.Tensor

    def __len__(self) -> int:
        return int(self.mel.shape[0])

    def to(self, device: str | torch.device) -> Batch:
        return Batch(
            mel=self.mel.to(device),
            f0=self.f0.to(device),
            voiced=self.voiced.to(device),
            speaker=self.speaker.to(device),
            emotion=self.emotion.to(device),
            phones=self.phones.to(device),
        )

    def without_emotion_labels(self) -> Batch:
        return Batch(
            mel=self.mel,
            f0=self.f0,
            voiced=self.voiced,
            speaker=self.speaker,
            emotion=torch.full_like(self.emotion, NO_LABEL),
            phones=self.phones,
        )


def _cache_key(path: Path, cfg: Config) -> str:
    audio = cfg.audio.model_dump_json()
    return hashlib.sha1(f"{path.resolve()}|{audio}".encode()).hexdigest()[:20]


def analyse_entry(
    manifest: DatasetManifest,
    entry: ManifestEntry,
    cfg: Config,
    front_end: MelFrontEnd | None = None,
    cache_dir: Path | None = None,
) -> Clip:
    """Load one manifest entry into a :class:`Clip` (oracle pitch cached on disk if asked)."""
    front_end = front_end or MelFrontEnd(cfg.audio)
    path = manifest.resolve(entry)
    waveform = load_waveform(path)
    if waveform.sample_rate != cfg.audio.sample_rate:
        waveform = resample(waveform, cfg.audio.sample_rate)
    mel = front_end.log_mel(waveform).values.astype(np.float32)

    cached = cache_dir / f"{_cache_key(path, cfg)}.npz" if cache_dir else None
    if cached is not None and cached.exists():
        with np.load(cached) as data:
            contour = F0Contour(f0_hz=data["f0"], confidence=data["confidence"])
    else:
        contour = oracle_f0(waveform, cfg.audio)
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            np.savez(cached, f0=contour.f0_hz, confidence=contour.confidence)
    mask = voicing_mask(contour, cfg.descriptors.conf_threshold)

    phones = None
    if entry.labels_path:
        labels = Path(entry.labels_path)
        labels = labels if labels.is_absolute() else Path(manifest.root) / labels
        if labels.exists():
            phones = np.load(labels).astype(np.int64)[: mel.shape[1]]

    return Clip(
        utt_id=Path(entry.audio_path).stem,
        mel=mel,
        f0=contour.f0_hz.astype(np.float32),
        voiced=mask.voiced,
        speaker_code=entry.speaker_code,
        emotion_code=entry.emotion_code,
        phones=phones,
    )


class ClipDataset:
    """In-memory clips of one split with seeded random crops.

    Batches report ``speaker_code`` as the domain; Stage I hands in entries
    whose speaker code has been replaced by the emotion code.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        cfg: Config,
        split: str = "train",
        entries: list[ManifestEntry] | None = None,
        cache_dir: str | Path | None = None,
    ):
        self.cfg = cfg
        self.segment_frames = cfg.segment_frames
        self.front_end = MelFrontEnd(cfg.audio)
        self.floor_value = float(np.log(cfg.audio.floor))
        selected = entries if entries is not None else manifest.split(split)
        if not selected:
            raise DatasetError(f"split '{split}' of the manifest is empty")
        cache = Path(cache_dir) if cache_dir else None
        self.clips = [
            analyse_entry(manifest, entry, cfg, self.front_end, cache) for entry in selected
        ]
        self._by_speaker: dict[int, list[int]] = {}
        for index, clip in enumerate(self.clips):
            self._by_speaker.setdefault(clip.speaker_code, []).append(index)
        logger.info(
            f"Loaded {len(self.clips)} clips ({split}), "
            f"{sum(c.emotion_code >= 0 for c in self.clips)} emotion-labelled"
        )

    def __len__(self) -> int:
        return len(self.clips)

    @property
    def speakers(self) -> list[int]:
        return sorted(self._by_speaker)

    def crop(self, clip: Clip, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
        """Exactly ``segment_frames`` frames; short clips are padded with silence."""
        seg = self.segment_frames
        n = clip.n_frames
        phones = clip.phones if clip.phones is not None else np.full(n, NO_LABEL, np.int64)
        if len(phones) < n:
            phones = np.pad(phones, (0, n - len(phones)), constant_values=NO_LABEL)
        if n >= seg:
            start = int(rng.integers(0, n - seg + 1))
            window = slice(start, start + seg)
            return clip.mel[:, window], clip.f0[window], clip.voiced[window], phones[window]
        pad = seg - n
        return (
            np.pad(clip.mel, ((0, 0), (0, pad)), constant_values=self.floor_value),
            np.pad(clip.f0, (0, pad)),
            np.pad(clip.voiced, (0, pad)),
            np.pad(phones, (0, pad), constant_values=NO_LABEL),
        )

    def collate(self, indices: list[int], rng: np.random.Generator) -> Batch:
        crops = [self.crop(self.clips[i], rng) for i in indices]
        mel, f0, voiced, phones = (np.stack(parts) for parts in zip(*crops, strict=True))
        return Batch(
            mel=torch.from_numpy(mel.astype(np.float32)),
            f0=torch.from_numpy(f0.astype(np.float32)),
            voiced=torch.from_numpy(voiced.astype(bool)),
            speaker=torch.tensor([self.clips[i].speaker_code for i in indices]),
            emotion=torch.tensor([self.clips[i].emotion_code for i in indices]),
            phones=torch.from_numpy(phones.astype(np.int64)),
        )

    def sample_batch(self, rng: np.random.Generator, batch_size: int) -> Batch:
        replace = batch_size > len(self.clips)
        indices = rng.choice(len(self.clips), size=batch_size, replace=replace).tolist()
        return self.collate(indices, rng)

    def sample_for_speakers(self, rng: np.random.Generator, codes: torch.Tensor) -> torch.Tensor:
        """Reference mels [B, M, T], one random clip of each requested speaker."""
        indices = []
        for code in codes.tolist():
            pool = self._by_speaker.get(int(code))
            if not pool:
                raise DatasetError(f"no training clip for speaker code {code}")
            indices.append(pool[int(rng.integers(0, len(pool)))])
        return self.collate(indices, rng).mel

    def iter_batches(self, batch_size: int, rng: np.random.Generator | None = None):
        """Whole clips in order, cropped deterministically when ``rng`` is given."""
        rng = rng or np.random.default_rng(0)
        for start in range(0, len(self.clips), batch_size):
            yield self.collate(list(range(start, min(start + batch_size, len(self.clips)))), rng)
