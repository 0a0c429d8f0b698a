"""Inherited voice-conversion objectives as pure functions of network outputs."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F


def adversarial_target(logits: torch.Tensor, target: float) -> torch.Tensor:
    """Binary cross-entropy of per-domain discriminator logits against 1 or 0."""
    return F.binary_cross_entropy_with_logits(logits, torch.full_like(logits, target))


def generator_adversarial(fake_logits: torch.Tensor) -> torch.Tensor:
    """Non-saturating generator loss: -mean log sigmoid(D(fake))."""
    return adversarial_target(fake_logits, 1.0)


def discriminator_adversarial(real_logits: torch.Tensor, fake_logits: torch.Tensor) -> torch.Tensor:
    """``mean log D(real) + mean log(1 - D(fake))``; the discriminator ascends this value."""
    return -(adversarial_target(real_logits, 1.0) + adversarial_target(fake_logits, 0.0))


def style_reconstruction(predicted_style: torch.Tensor, target_style: torch.Tensor) -> torch.Tensor:
    return (predicted_style - target_style).abs().mean()


def diversity(fake: torch.Tensor, fake_other: torch.Tensor) -> torch.Tensor:
    """Distance between conversions under two style draws; the second draw is not trained."""
    return (fake - fake_other.detach()).abs().mean()


def normalize_f0(f0: torch.Tensor, eps: float = 1e-5) -> torch.Tensor:
    """Divide each utterance's F0 track [B, T] by its own mean."""
    return f0 / (f0.mean(dim=-1, keepdim=True) + eps)


def f0_consistency(f0_real: torch.Tensor, f0_fake: torch.Tensor) -> torch.Tensor:
    return (normalize_f0(f0_fake) - normalize_f0(f0_real)).abs().mean()


def linguistic_consistency(ling_real: torch.Tensor, ling_fake: torch.Tensor) -> torch.Tensor:
    return (ling_fake - ling_real).abs().mean()


def cycle_consistency(real: torch.Tensor, reconstructed: torch.Tensor) -> torch.Tensor:
    return (reconstructed - real).abs().mean()


def _changed_speaker(
    logits: torch.Tensor, labels: torch.Tensor, mask: torch.Tensor
) -> torch.Tensor:
    if not bool(mask.any()):
        return logits.sum() * 0.0
    return F.cross_entropy(logits[mask], labels[mask])


def speaker_classification(
    logits_on_fake: torch.Tensor, source: torch.Tensor, target: torch.Tensor
) -> torch.Tensor:
    """Classifier side: recover the SOURCE speaker from conversions to another speaker."""
    return _changed_speaker(logits_on_fake, source, source != target)


def adversarial_speaker(
    logits_on_fake: torch.Tensor, source: torch.Tensor, target: torch.Tensor
) -> torch.Tensor:
    """Generator side: make the speaker classifier pick the TARGET speaker."""
    return _changed_speaker(logits_on_fake, target, source != target)


@dataclass(slots=True)
class GeneratorContext:
    """Everything the generator-phase base losses read, already computed by the networks."""

    real: torch.Tensor
    fake: torch.Tensor
    fake_logits: torch.Tensor
    target_style: torch.Tensor
    predicted_style: torch.Tensor
    ling_real: torch.Tensor
    ling_fake: torch.Tensor
    reconstructed: torch.Tensor
    source_speaker: torch.Tensor
    target_speaker: torch.Tensor
    fake_other: torch.Tensor | None = None
    # absent when the pitch network or the speaker classifier is not part of the run
    f0_real: torch.Tensor | None = None
    f0_fake: torch.Tensor | None = None
    speaker_logits_on_fake: torch.Tensor | None = None


def base_stargan_losses(
    ctx: GeneratorContext, need_diversity: bool = True
) -> dict[str, torch.Tensor]:
    """Generator-phase record {adv, sty, ds, f0, asr, cyc, aspk}.

    ``f0`` and ``aspk`` are left out when their inputs are missing from the
    context.
    """
    if need_diversity and ctx.fake_other is None:
        raise ValueError("diversity term is active but no second style draw was given")
    terms = {
        "adv": generator_adversarial(ctx.fake_logits),
        "sty": style_reconstruction(ctx.predicted_style, ctx.target_style),
        "asr": linguistic_consistency(ctx.ling_real, ctx.ling_fake),
        "cyc": cycle_consistency(ctx.real, ctx.reconstructed),
    }
    if ctx.f0_real is not None and ctx.f0_fake is not None:
        terms["f0"] = f0_consistency(ctx.f0_real, ctx.f0_fake)
    if ctx.speaker_logits_on_fake is not None:
        terms["aspk"] = adversarial_speaker(
            ctx.speaker_logits_on_fake, ctx.source_speaker, ctx.target_speaker
        )
    if ctx.fake_other is not None:
        terms["ds"] = diversity(ctx.fake, ctx.fake_other)
    else:
        terms["ds"] = ctx.fake.sum() * 0.0
    return terms


def discriminator_losses(
    real_logits: torch.Tensor,
    fake_logits: torch.Tensor,
    speaker_logits_on_fake: torch.Tensor | None,
    source_speaker: torch.Tensor,
    target_speaker: torch.Tensor,
) -> dict[str, torch.Tensor]:
    """Discriminator-phase record {adv, spk}; the emotion term is added by the caller."""
    terms = {"adv": discriminator_adversarial(real_logits, fake_logits)}
    if speaker_logits_on_fake is not None:
        terms["spk"] = speaker_classification(
            speaker_logits_on_fake, source_speaker, target_speaker
        )
    return terms
