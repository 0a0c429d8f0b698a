"""Shapes and contracts of the desk-scale networks."""

from __future__ import annotations

import pytest
import torch

from src.config import LossWeights
from src.errors import DomainCodeError, ShapeMismatchError
from src.models import (
    COMPONENTS,
    DomainClassifier,
    F0Net,
    Generator,
    LingNet,
    MappingNetwork,
    StyleEncoder,
    build_bundle,
    trainable_components,
)
from src.models.layers import check_codes

B, M, T = 2, 80, 32


@pytest.fixture
def mel():
    return torch.randn(B, M, T)


def test_generator_preserves_shape(cfg, mel):
    f0_net = F0Net(M, cfg.models)
    generator = Generator(M, cfg.models, use_f0=True)
    _, features = f0_net(mel)

    out = generator(mel, features, torch.randn(B, cfg.models.style_dim))

    assert out.shape == (B, M, T)


@pytest.mark.parametrize("frames", [17, 40, 61])
def test_generator_keeps_any_frame_count(cfg, frames):
    generator = Generator(M, cfg.models, use_f0=False)

    out = generator(torch.randn(1, M, frames), None, torch.randn(1, cfg.models.style_dim))

    assert out.shape == (1, M, frames)


def test_generator_shape_errors(cfg, mel):
    generator = Generator(M, cfg.models, use_f0=True)
    style = torch.randn(B, cfg.models.style_dim)

    with pytest.raises(ShapeMismatchError, match="style"):
        generator(mel, None, torch.randn(B, cfg.models.style_dim + 1))
    with pytest.raises(ShapeMismatchError, match="f0_features"):
        generator(mel, None, style)
    with pytest.raises(ShapeMismatchError, match="frames"):
        generator(mel, torch.randn(B, cfg.models.f0_channels, T - 1), style)


def test_generator_rejects_indivisible_mel_count(cfg):
    with pytest.raises(ValueError, match="divisible"):
        Generator(81, cfg.models)


def test_style_encoder_picks_the_requested_head(cfg, mel):
    encoder = StyleEncoder(3, cfg.models)
    code = torch.tensor([2, 0])

    style = encoder(mel, code)
    heads = encoder.all_heads(mel)

    assert style.shape == (B, cfg.models.style_dim)
    assert heads.shape == (B, 3, cfg.models.style_dim)
    torch.testing.assert_close(style[0], heads[0, 2])
    torch.testing.assert_close(style[1], heads[1, 0])


def test_mapping_network_latent_draw_is_seeded(cfg):
    mapping = MappingNetwork(2, cfg.models)

    a = mapping.sample_latent(3, torch.Generator().manual_seed(1))
    b = mapping.sample_latent(3, torch.Generator().manual_seed(1))

    torch.testing.assert_close(a, b)
    assert mapping(a, torch.tensor([0, 1, 1])).shape == (3, cfg.models.style_dim)


def test_codes_out_of_range_are_rejected(cfg, mel):
    with pytest.raises(DomainCodeError, match="0..1"):
        check_codes(torch.tensor([0, 2]), 2)
    with pytest.raises(DomainCodeError):
        StyleEncoder(2, cfg.models)(mel, torch.tensor([-1, 0]))
    with pytest.raises(DomainCodeError):
        DomainClassifier(2, cfg.models).discriminate(mel, torch.tensor([0, 5]))


def test_classifier_outputs(cfg, mel):
    classifier = DomainClassifier(5, cfg.models)

    assert classifier(mel).shape == (B, 5)
    assert classifier.discriminate(mel, torch.tensor([1, 4])).shape == (B,)
    torch.testing.assert_close(classifier.distribution(mel).sum(dim=-1), torch.ones(B))


def test_f0_net_outputs_non_negative_pitch(cfg, mel):
    f0, features = F0Net(M, cfg.models)(mel)

    assert f0.shape == (B, T)
    assert features.shape == (B, cfg.models.f0_channels, T)
    assert (f0 >= 0).all()


def test_ling_net_posteriors_and_decode(cfg, mel):
    ling = LingNet(M, cfg.models)

    posteriors = ling(mel)
    decoded = ling.decode(mel)

    assert posteriors.shape == (B, T, cfg.models.n_symbols)
    torch.testing.assert_close(posteriors.sum(dim=-1), torch.ones(B, T))
    assert len(decoded) == B
    for row in decoded:
        assert all(a != b for a, b in zip(row, row[1:]))


def test_bundle_is_seeded_and_complete(cfg):
    first = build_bundle(cfg, n_domains=3)
    second = build_bundle(cfg, n_domains=3)

    assert set(first.components()) == set(COMPONENTS)
    for name, module in first.components().items():
        for p, q in zip(module.parameters(), second.components()[name].parameters()):
            torch.testing.assert_close(p, q)
    assert first.non_finite_components() == []
    assert all(count > 0 for count in first.parameter_counts().values())


def test_emotion_classifier_trains_only_with_emotion_terms():
    assert "emotion_classifier" in trainable_components(LossWeights())
    quiet = LossWeights(disabled=["emod", "emog"])
    assert "emotion_classifier" not in trainable_components(quiet)
    assert "f0_net" not in trainable_components(LossWeights())


def test_generator_gradients_match_finite_differences(cfg):
    generator = Generator(8, cfg.models, use_f0=False).double()
    mel = torch.randn(1, 8, 6, dtype=torch.float64, requires_grad=True)
    style = torch.randn(1, cfg.models.style_dim, dtype=torch.float64, requires_grad=True)

    assert torch.autograd.gradcheck(
        lambda m, s: generator(m, None, s), (mel, style), eps=1e-6, atol=1e-4
    )


def test_style_encoder_gradients_match_finite_differences(cfg):
    encoder = StyleEncoder(2, cfg.models).double()
    mel = torch.randn(1, 16, 16, dtype=torch.float64, requires_grad=True)

    assert torch.autograd.gradcheck(
        lambda m: encoder(m, torch.tensor([1])), (mel,), eps=1e-6, atol=1e-4
    )


def test_mapping_network_styles_vary_with_the_latent(cfg):
    mapping = MappingNetwork(2, cfg.models)
    z = mapping.sample_latent(100, torch.Generator().manual_seed(2))

    with torch.no_grad():
        styles = mapping(z, torch.ones(100, dtype=torch.long))

    assert (styles.var(dim=0) > 0).all()


def test_emotion_classifier_gradients_match_finite_differences(cfg):
    classifier = DomainClassifier(5, cfg.models).double()
    mel = torch.randn(1, 16, 16, dtype=torch.float64, requires_grad=True)

    assert torch.autograd.gradcheck(
        lambda m: classifier.distribution(m), (mel,), eps=1e-6, atol=1e-4
    )


def test_f0_net_gradients_match_finite_differences(cfg):
    f0_net = F0Net(8, cfg.models).double()
    mel = torch.randn(1, 8, 12, dtype=torch.float64, requires_grad=True)

    assert torch.autograd.gradcheck(lambda m: f0_net(m)[0], (mel,), eps=1e-6, atol=1e-4)
