"""Identities of the individual loss terms."""

from __future__ import annotations

import math

import numpy as np
import pytest
import torch

from src.audio.mel import MelFrontEnd
from src.descriptors.kinds import ALL_KINDS, DescriptorKind
from src.descriptors.pitch import VoicingMask
from src.descriptors.series import descriptor_series
from src.errors import ShapeMismatchError
from src.losses import (
    acoustic_feature_loss,
    discriminator_adversarial,
    emotion_cross_entropy,
    generator_adversarial,
    loss_af,
    loss_embed,
    loss_emod,
    loss_emog,
    normalize_f0,
)
from src.losses.stargan import (
    adversarial_speaker,
    cycle_consistency,
    diversity,
    f0_consistency,
    linguistic_consistency,
    speaker_classification,
)

FREQS = MelFrontEnd().center_freqs


def test_loss_af_is_zero_for_identical_series():
    mel = torch.randn(80, 40, dtype=torch.float64)
    mask = VoicingMask(voiced=np.ones(40, dtype=bool))
    series = descriptor_series("spectral_kurtosis", mel, mask, center_freqs=FREQS)

    assert float(loss_af(series, series)) == 0.0


def test_loss_af_averages_over_kinds_with_windows():
    mask = VoicingMask(voiced=np.ones(40, dtype=bool))
    src = torch.randn(80, 40, dtype=torch.float64)
    conv = src + 0.5
    kinds = [DescriptorKind.SPECTRAL_CENTROID, DescriptorKind.LOUDNESS]
    src_series = [descriptor_series(k, src, mask, center_freqs=FREQS) for k in kinds]
    conv_series = [descriptor_series(k, conv, mask, center_freqs=FREQS) for k in kinds]

    loss = loss_af(src_series, conv_series)

    # a uniform log-mel shift leaves the centroid alone and moves loudness by 10*0.5/ln 10 dB
    assert float(loss) == pytest.approx(0.5 * 10 * 0.5 / np.log(10), rel=1e-5)


def test_loss_af_mismatched_series():
    mask = VoicingMask(voiced=np.ones(40, dtype=bool))
    mel = torch.randn(80, 40, dtype=torch.float64)
    a = descriptor_series("loudness", mel, mask, center_freqs=FREQS)
    b = descriptor_series("spectral_centroid", mel, mask, center_freqs=FREQS)

    with pytest.raises(ShapeMismatchError):
        loss_af(a, b)


def test_batched_af_loss_uses_source_voicing_only():
    src = torch.randn(2, 80, 32)
    voiced = torch.zeros(2, 32, dtype=torch.bool)
    voiced[0, :16] = True

    loss, counts = acoustic_feature_loss(src, src + 1.0, voiced, ALL_KINDS[:3], FREQS, 8)

    # windows (0,8), (4,12), (8,16), (12,20) of the first clip only
    assert counts == {"spectral_centroid": 4, "spectral_kurtosis": 4, "loudness": 4}
    assert float(loss) > 0


def test_batched_af_loss_without_windows_is_attached_zero():
    src = torch.randn(1, 80, 16)
    conv = src.clone().requires_grad_(True)

    loss, counts = acoustic_feature_loss(
        src, conv, torch.zeros(1, 16, dtype=torch.bool), ["loudness"], FREQS, 8
    )
    loss.backward()

    assert float(loss) == 0.0
    assert counts == {"loudness": 0}
    assert conv.grad is not None


def test_batched_delta_f0_term():
    src = torch.randn(1, 80, 16)
    voiced = torch.ones(1, 16, dtype=torch.bool)
    f0 = torch.linspace(100, 140, 16).unsqueeze(0)

    same, _ = acoustic_feature_loss(src, src, voiced, ["delta_f0"], FREQS, 8, f0, f0)
    moved, _ = acoustic_feature_loss(src, src, voiced, ["delta_f0"], FREQS, 8, f0, f0.flip(-1))

    assert float(same) == 0.0
    assert float(moved) > 0.0


def test_loss_embed_is_mean_absolute_difference():
    a = torch.tensor([[0.0, 1.0], [2.0, 2.0]])
    b = torch.tensor([[1.0, 1.0], [2.0, 0.0]])

    assert float(loss_embed(a, b)) == pytest.approx(0.75)


def test_emotion_ce_ignores_unlabelled_members():
    logits = torch.tensor([[5.0, 0.0], [0.0, 5.0]], requires_grad=True)

    loss, has_labels = emotion_cross_entropy(logits, torch.tensor([0, -1]))
    expected = torch.nn.functional.cross_entropy(logits[:1], torch.tensor([0]))

    assert has_labels
    assert float(loss) == pytest.approx(float(expected))


def test_emotion_ce_without_labels_is_zero_and_flagged():
    logits = torch.randn(3, 5, requires_grad=True)

    for fn in (loss_emod, loss_emog):
        loss, has_labels = fn(logits, torch.full((3,), -1))
        loss.backward()
        assert not has_labels
        assert float(loss) == 0.0


def test_adversarial_terms():
    confident_real = torch.full((4,), 20.0)
    confident_fake = torch.full((4,), -20.0)

    assert float(discriminator_adversarial(confident_real, confident_fake)) == pytest.approx(
        0.0, abs=1e-6
    )
    assert float(generator_adversarial(torch.zeros(3))) == pytest.approx(np.log(2))


def test_diversity_does_not_train_the_second_draw():
    fake = torch.randn(2, 4, requires_grad=True)
    other = torch.randn(2, 4, requires_grad=True)

    diversity(fake, other).backward()

    assert fake.grad is not None
    assert other.grad is None


def test_f0_consistency_is_scale_invariant():
    f0 = torch.rand(2, 20) * 100 + 100

    assert float(f0_consistency(f0, f0 * 1.5)) == pytest.approx(0.0, abs=1e-5)
    torch.testing.assert_close(normalize_f0(f0).mean(dim=-1), torch.ones(2), atol=1e-5, rtol=0)


def test_speaker_terms_ignore_self_conversions():
    logits = torch.randn(3, 4, requires_grad=True)
    source = torch.tensor([0, 1, 2])

    assert float(speaker_classification(logits, source, source)) == 0.0
    assert float(adversarial_speaker(logits, source, source)) == 0.0
    target = torch.tensor([1, 1, 3])
    expected = torch.nn.functional.cross_entropy(logits[[0, 2]], target[[0, 2]])
    assert float(adversarial_speaker(logits, source, target)) == pytest.approx(float(expected))


def test_uniform_emotion_logits_give_log_five():
    logits = torch.zeros(4, 5, dtype=torch.float64)

    loss, _ = emotion_cross_entropy(logits, torch.tensor([0, 1, 2, 4]))

    assert float(loss) == pytest.approx(math.log(5), abs=1e-9)


def test_identity_conversion_collapses_reconstruction_terms():
    real = torch.randn(2, 80, 32)
    ling = torch.softmax(torch.randn(2, 32, 12), dim=-1)
    f0 = torch.rand(2, 32) * 100 + 100
    voiced = torch.ones(2, 32, dtype=torch.bool)
    embedding = torch.randn(2, 64)

    af, _ = acoustic_feature_loss(real, real, voiced, ALL_KINDS, FREQS, 8, f0, f0)

    assert float(af) == 0.0
    assert float(loss_embed(embedding, embedding)) == 0.0
    assert float(cycle_consistency(real, real)) == 0.0
    assert float(linguistic_consistency(ling, ling)) == 0.0
    assert float(f0_consistency(f0, f0)) == 0.0
