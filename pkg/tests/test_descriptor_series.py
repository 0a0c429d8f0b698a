"""Per-window descriptor series, voicing retention and the feature dump."""

from __future__ import annotations

import csv

import numpy as np
import pytest
import torch

from src.audio.io import load_waveform
from src.audio.manifest import load_manifest
from src.audio.mel import MelFrontEnd
from src.audio.types import Waveform
from src.descriptors.kinds import ALL_KINDS, DescriptorKind
from src.descriptors.oracles import oracle_series
from src.descriptors.pitch import F0Contour, VoicingMask, oracle_f0, voicing_mask
from src.descriptors.series import (
    descriptor_series,
    feature_table,
    retention_mask,
    window_values,
    write_feature_table,
)
from src.errors import AudioFormatError


@pytest.fixture(scope="module")
def analysed(toy_manifest_path):
    manifest = load_manifest(toy_manifest_path)
    waveform = load_waveform(manifest.resolve(manifest.entries[0]))
    mel = MelFrontEnd().log_mel(waveform)
    contour = oracle_f0(waveform)
    return mel, contour, voicing_mask(contour)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_series_matches_oracle_enumeration(analysed, kind):
    mel, contour, mask = analysed

    series = descriptor_series(kind, mel, mask, f0=contour.f0_hz)
    expected = oracle_series(
        kind.value, mel.values, mel.mel_center_freqs, mask.voiced, 8, f0=contour.f0_hz
    )

    assert series.window_indices == [index for index, _ in expected]
    np.testing.assert_allclose(
        series.values.numpy(), [value for _, value in expected], rtol=1e-7, atol=1e-9
    )
    assert len(series.window_map) == len(series)


def test_toy_clip_has_voiced_windows(analysed):
    mel, contour, mask = analysed

    assert mask.voiced_fraction > 0.3
    assert not descriptor_series("spectral_kurtosis", mel, mask).is_empty


def test_unvoiced_utterance_gives_empty_series(analysed):
    mel, _, mask = analysed
    silent = VoicingMask(voiced=np.zeros(mask.n_frames, dtype=bool))

    for kind in ALL_KINDS:
        series = descriptor_series(kind, mel, silent, f0=np.zeros(mask.n_frames))
        assert series.is_empty
        assert series.window_indices == []


def test_half_voiced_window_is_retained():
    voiced = torch.tensor([1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0], dtype=torch.bool)

    retained = retention_mask(voiced, 8)

    assert retained.tolist() == [True, False]


def test_mask_length_must_match(analysed):
    mel, _, mask = analysed
    short = VoicingMask(voiced=mask.voiced[:-1])

    with pytest.raises(ValueError, match="frames"):
        descriptor_series("loudness", mel, short)


def test_tensor_input_keeps_gradient(analysed):
    mel, _, mask = analysed
    log_mel = torch.from_numpy(mel.values).requires_grad_(True)

    series = descriptor_series(
        DescriptorKind.SPECTRAL_CENTROID, log_mel, mask, center_freqs=mel.mel_center_freqs
    )
    series.values.sum().backward()

    assert log_mel.grad is not None
    assert torch.count_nonzero(log_mel.grad) > 0


def test_window_values_agree_with_series_on_retained_windows(analysed):
    mel, _, mask = analysed
    log_mel = torch.from_numpy(mel.values)

    everywhere, _ = window_values(DescriptorKind.LOUDNESS, log_mel, mel.mel_center_freqs, 8)
    series = descriptor_series(DescriptorKind.LOUDNESS, mel, mask)

    torch.testing.assert_close(everywhere[series.window_indices], series.values)


def test_delta_f0_needs_contour(analysed):
    mel, _, mask = analysed

    with pytest.raises(ValueError):
        descriptor_series("delta_f0", mel, mask)


def test_feature_table_is_tab_separated(tmp_path, analysed):
    mel, contour, mask = analysed
    series = [descriptor_series(k, mel, mask, f0=contour.f0_hz) for k in ALL_KINDS]

    rows = feature_table("utt1", series)
    path = write_feature_table(rows, tmp_path / "features.tsv")

    with open(path, encoding="utf-8") as f:
        read = list(csv.DictReader(f, delimiter="\t"))
    assert len(read) == sum(len(s) for s in series)
    assert {r["kind"] for r in read} == {k.value for k in ALL_KINDS}
    assert read[0]["utterance"] == "utt1"


def test_voicing_mask_threshold():
    contour = F0Contour(f0_hz=[0.0, 120.0, 130.0], confidence=[0.9, 0.4, 0.8])

    assert voicing_mask(contour, 0.5).voiced.tolist() == [False, False, True]
    with pytest.raises(ValueError):
        voicing_mask(contour, 1.0)


def test_oracle_f0_on_silence_and_wrong_rate(tone):
    silent = oracle_f0(Waveform(samples=np.zeros(24000), sample_rate=24000))
    assert silent.n_frames == 81
    assert not silent.f0_hz.any()

    with pytest.raises(AudioFormatError):
        oracle_f0(Waveform(samples=tone.samples, sample_rate=16000))


def test_oracle_f0_tracks_a_steady_tone(tone):
    contour = oracle_f0(tone)
    voiced = voicing_mask(contour).voiced

    assert contour.n_frames == len(tone) // 300 + 1
    assert voiced.mean() > 0.8
    assert np.median(contour.f0_hz[voiced]) == pytest.approx(150.0, rel=0.03)


def test_oracle_f0_tracks_a_sawtooth():
    t = np.arange(48000) / 24000
    saw = 0.5 * (2.0 * np.mod(200.0 * t, 1.0) - 1.0)

    contour = oracle_f0(Waveform(samples=saw, sample_rate=24000))
    voiced = voicing_mask(contour).voiced

    assert voiced.mean() > 0.8
    assert np.median(contour.f0_hz[voiced]) == pytest.approx(200.0, abs=2.0)


def test_white_noise_is_mostly_unvoiced():
    noise = 0.3 * np.random.default_rng(5).standard_normal(48000)

    mask = voicing_mask(oracle_f0(Waveform(samples=noise, sample_rate=24000)))

    assert mask.voiced_fraction <= 0.1
