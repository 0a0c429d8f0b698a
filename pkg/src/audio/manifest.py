"""Dataset manifests: one JSON record per line.

Each record names an audio file, its speaker, an optional emotion label and
the split. Speaker ids are remapped to a contiguous 0..K-1 code space and the
mapping is persisted next to the manifest.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Literal

import numpy as np
import portalocker
from pydantic import BaseModel, Field, ValidationError, field_validator

from ..config import EMOTIONS
from ..errors import ManifestError

logger = logging.getLogger(__name__)

Split = Literal["train", "val", "test"]

EMOTION_ALIASES = {"angry": "anger", "surprised": "surprise"}


def normalize_emotion(label: str | None) -> str | None:
    """Map a label onto the closed emotion set; None stays None."""
    if label is None:
        return None
    cleaned = str(label).strip().lower()
    if not cleaned:
        return None
    cleaned = EMOTION_ALIASES.get(cleaned, cleaned)
    if cleaned not in EMOTIONS:
        raise ValueError(f"unknown emotion label {label!r} (expected one of {list(EMOTIONS)})")
    return cleaned


class ManifestEntry(BaseModel):
    """One utterance of a dataset manifest."""

    audio_path: str = Field(..., description="Path to a PCM WAV file")
    speaker_id: str = Field(..., description="Dataset speaker identifier")
    emotion_label: str | None = Field(default=None)
    split: Split = Field(default="train")
    speaker_code: int = Field(default=-1, description="Contiguous speaker code (assigned on load)")
    gender: str | None = Field(default=None)
    accent: str | None = Field(default=None)
    transcript: str | None = Field(default=None)
    labels_path: str | None = Field(default=None, description="Per-frame phone labels (.npy)")

    @field_validator("speaker_id", mode="before")
    @classmethod
    def _speaker_as_str(cls, value: object) -> str:
        return str(value)

    @field_validator("emotion_label", mode="before")
    @classmethod
    def _closed_label_set(cls, value: object) -> str | None:
        return normalize_emotion(value if value is None else str(value))

    @property
    def is_labelled(self) -> bool:
        return self.emotion_label is not None

    @property
    def emotion_code(self) -> int:
        return EMOTIONS.index(self.emotion_label) if self.emotion_label is not None else -1


class DatasetManifest(BaseModel):
    """Validated manifest with a contiguous speaker code space."""

    entries: list[ManifestEntry] = Field(default_factory=list)
    speaker_map: dict[str, int] = Field(default_factory=dict)
    root: str = Field(default=".")

    @property
    def n_speakers(self) -> int:
        return len(self.speaker_map)

    @property
    def n_unlabelled(self) -> int:
        return sum(1 for e in self.entries if not e.is_labelled)

    def split(self, name: Split) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    def emotions_present(self, split: Split | None = None) -> set[str]:
        entries = self.entries if split is None else self.split(split)
        return {e.emotion_label for e in entries if e.emotion_label is not None}

    def resolve(self, entry: ManifestEntry) -> Path:
        path = Path(entry.audio_path)
        return path if path.is_absolute() else Path(self.root) / path


def _speaker_sort_key(speaker_id: str) -> tuple[int, int | str]:
    return (0, int(speaker_id)) if speaker_id.lstrip("-").isdigit() else (1, speaker_id)


def build_speaker_map(entries: list[ManifestEntry]) -> dict[str, int]:
    ids = sorted({e.speaker_id for e in entries}, key=_speaker_sort_key)
    return {speaker_id: code for code, speaker_id in enumerate(ids)}


def speaker_map_path(manifest_path: str | Path) -> Path:
    manifest_path = Path(manifest_path)
    return manifest_path.with_name(manifest_path.stem + ".speakers.json")


def _persist_speaker_map(path: Path, speaker_map: dict[str, int]) -> None:
    with open(path, "a+", encoding="utf-8") as f:
        portalocker.lock(f, portalocker.LOCK_EX)
        try:
            f.seek(0)
            f.truncate()
            json.dump(speaker_map, f, indent=2, sort_keys=True)
        finally:
            portalocker.unlock(f)


def load_manifest(path: str | Path, check_audio: bool = True) -> DatasetManifest:
    """Parse and validate a manifest; the speaker id map is written next to it."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")

    root = path.parent
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ManifestError(f"malformed record: {e}", line_number) from e
            try:
                entry = ManifestEntry(**record)
            except ValidationError as e:
                raise ManifestError(_first_error(e), line_number) from e

            key = str(Path(entry.audio_path))
            if key in seen:
                raise ManifestError(
                    f"duplicate entry {entry.audio_path!r} (first seen on line {seen[key]})",
                    line_number,
                )
            seen[key] = line_number

            audio = Path(entry.audio_path)
            audio = audio if audio.is_absolute() else root / audio
            if check_audio and not audio.exists():
                raise ManifestError(f"missing audio file {audio}", line_number)
            entries.append(entry)

    speaker_map = build_speaker_map(entries)
    for entry in entries:
        entry.speaker_code = speaker_map[entry.speaker_id]
    _persist_speaker_map(speaker_map_path(path), speaker_map)

    manifest = DatasetManifest(entries=entries, speaker_map=speaker_map, root=str(root))
    logger.info(
        f"Loaded manifest {path}: {len(entries)} entries, {manifest.n_speakers} speakers, "
        f"{manifest.n_unlabelled} unlabelled"
    )
    return manifest


def _first_error(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return str(error)
    first = details[0]
    field = ".".join(str(p) for p in first.get("loc", ()))
    return f"{field}: {first.get('msg', 'invalid value')}"


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            record = entry.model_dump(exclude={"speaker_code"}, exclude_none=True)
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def split_manifest(
    entries: list[ManifestEntry],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> list[ManifestEntry]:
    """Assign train/val/test per speaker, deterministically under ``seed``."""
    if abs(sum(ratios) - 1.0) > 1e-6 or min(ratios) < 0:
        raise ValueError(f"split ratios must be non-negative and sum to 1, got {ratios}")

    rng = np.random.default_rng(seed)
    by_speaker: dict[str, list[int]] = {}
    for index, entry in enumerate(entries):
        by_speaker.setdefault(entry.speaker_id, []).append(index)

    assigned = [entry.model_copy() for entry in entries]
    for speaker_id in sorted(by_speaker, key=_speaker_sort_key):
        indices = np.array(by_speaker[speaker_id])
        rng.shuffle(indices)
        n = len(indices)
        n_train = int(round(ratios[0] * n))
        n_val = int(round(ratios[1] * n))
        for rank, index in enumerate(indices):
            if rank < n_train:
                assigned[index].split = "train"
            elif rank < n_train + n_val:
                assigned[index].split = "val"
            else:
                assigned[index].split = "test"
    return assigned
