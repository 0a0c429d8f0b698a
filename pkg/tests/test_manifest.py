"""Tests for manifest parsing, speaker maps and split assignment."""

from __future__ import annotations

import json

import numpy as np
import pytest

from src.audio.io import save_waveform
from src.audio.manifest import (
    ManifestEntry,
    load_manifest,
    normalize_emotion,
    speaker_map_path,
    split_manifest,
)
from src.audio.types import Waveform
from src.errors import ManifestError


def _wav(tmp_path, name: str) -> str:
    save_waveform(Waveform(samples=np.zeros(2400), sample_rate=24000), tmp_path / name)
    return name


def _manifest(tmp_path, records: list, raw_lines: list[str] | None = None):
    path = tmp_path / "manifest.jsonl"
    lines = [json.dumps(r) for r in records] + (raw_lines or [])
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_speaker_codes_are_contiguous_and_persisted(tmp_path):
    records = [
        {"audio_path": _wav(tmp_path, "a.wav"), "speaker_id": "p10", "emotion_label": "Happy"},
        {"audio_path": _wav(tmp_path, "b.wav"), "speaker_id": "p02"},
        {"audio_path": _wav(tmp_path, "c.wav"), "speaker_id": "p10", "split": "test"},
    ]

    manifest = load_manifest(_manifest(tmp_path, records))

    assert manifest.speaker_map == {"p02": 0, "p10": 1}
    assert [e.speaker_code for e in manifest.entries] == [1, 0, 1]
    assert manifest.entries[0].emotion_label == "happy"
    assert manifest.n_unlabelled == 2
    assert len(manifest.split("test")) == 1
    persisted = json.loads(speaker_map_path(tmp_path / "manifest.jsonl").read_text())
    assert persisted == manifest.speaker_map


def test_numeric_speaker_ids_sort_numerically(tmp_path):
    records = [
        {"audio_path": _wav(tmp_path, f"{i}.wav"), "speaker_id": sid}
        for i, sid in enumerate(["10", "2", "1"])
    ]

    manifest = load_manifest(_manifest(tmp_path, records))

    assert manifest.speaker_map == {"1": 0, "2": 1, "10": 2}


def test_malformed_line_reports_line_number(tmp_path):
    records = [{"audio_path": _wav(tmp_path, "a.wav"), "speaker_id": "1"}]

    with pytest.raises(ManifestError, match="line 2") as exc:
        load_manifest(_manifest(tmp_path, records, ['{"audio_path": ']))
    assert exc.value.line_number == 2


def test_unknown_emotion_is_rejected_with_line(tmp_path):
    records = [{"audio_path": _wav(tmp_path, "a.wav"), "speaker_id": "1", "emotion_label": "bored"}]

    with pytest.raises(ManifestError, match="line 1"):
        load_manifest(_manifest(tmp_path, records))


def test_duplicate_and_missing_audio(tmp_path):
    wav = _wav(tmp_path, "a.wav")
    duplicate = [{"audio_path": wav, "speaker_id": "1"}, {"audio_path": wav, "speaker_id": "2"}]
    with pytest.raises(ManifestError, match="duplicate"):
        load_manifest(_manifest(tmp_path, duplicate))

    missing = [{"audio_path": "ghost.wav", "speaker_id": "1"}]
    with pytest.raises(ManifestError, match="missing audio"):
        load_manifest(_manifest(tmp_path, missing))
    assert load_manifest(_manifest(tmp_path, missing), check_audio=False).n_speakers == 1


def test_normalize_emotion():
    assert normalize_emotion(" Angry ") == "anger"
    assert normalize_emotion("surprised") == "surprise"
    assert normalize_emotion("") is None
    assert normalize_emotion(None) is None
    with pytest.raises(ValueError):
        normalize_emotion("bored")


def test_split_is_deterministic_per_speaker():
    entries = [
        ManifestEntry(audio_path=f"{s}_{i}.wav", speaker_id=str(s))
        for s in range(2)
        for i in range(10)
    ]

    first = split_manifest(entries, (0.8, 0.1, 0.1), seed=3)
    second = split_manifest(entries, (0.8, 0.1, 0.1), seed=3)

    assert [e.split for e in first] == [e.split for e in second]
    for speaker in ("0", "1"):
        splits = [e.split for e in first if e.speaker_id == speaker]
        assert splits.count("train") == 8
        assert splits.count("val") == 1
        assert splits.count("test") == 1


def test_split_ratios_must_sum_to_one():
    with pytest.raises(ValueError):
        split_manifest([], (0.5, 0.5, 0.5))
