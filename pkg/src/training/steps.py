"""One adversarial training step: discriminator phase, then generator phase."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from ..config import Config, LossWeights
from ..descriptors.kinds import DescriptorKind
from ..losses import (
    GeneratorContext,
    acoustic_feature_loss,
    base_stargan_losses,
    discriminator_losses,
    loss_embed,
    loss_emod,
    loss_emog,
    total_discriminator_loss,
    total_generator_loss,
)
from ..models import DISCRIMINATOR_SIDE, GENERATOR_SIDE, ModelBundle
from .data import Batch

logger = logging.getLogger(__name__)

STYLE_SOURCES = ("latent", "reference")


@dataclass(slots=True)
class Draws:
    """Random quantities of one step, drawn before any loss is evaluated."""

    target: torch.Tensor
    latent: torch.Tensor
    latent_other: torch.Tensor
    reference: torch.Tensor
    reference_other: torch.Tensor


@dataclass(slots=True)
class PhaseResult:
    loss: torch.Tensor
    terms: dict[str, torch.Tensor]
    flags: dict[str, bool]


class AdversarialStepper:
    """Computes both phase objectives for a :class:`ModelBundle`.

    ``use_f0=False`` and ``use_speaker_classifier=False`` give the plain
    emotion-conversion recipe (no pitch conditioning, no source-speaker
    classifier).
    """

    def __init__(
        self,
        bundle: ModelBundle,
        cfg: Config,
        center_freqs: np.ndarray,
        weights: LossWeights | None = None,
        use_f0: bool = True,
        use_speaker_classifier: bool = True,
    ):
        self.bundle = bundle
        self.cfg = cfg
        self.weights = weights or cfg.losses
        self.use_f0 = use_f0
        self.use_speaker_classifier = use_speaker_classifier
        self.center_freqs = torch.as_tensor(center_freqs, dtype=torch.float32)
        self.kinds = tuple(DescriptorKind.parse(k) for k in cfg.descriptors.active_kinds)
        self.window_len = cfg.descriptors.window_len
        self.domains = torch.arange(bundle.n_domains)

    def draw(
        self, batch: Batch, generator: torch.Generator, references, rng: np.random.Generator
    ) -> Draws:
        n = len(batch)
        pick = torch.randint(0, len(self.domains), (n,), generator=generator)
        target = self.domains[pick]
        latent = self.bundle.mapping.sample_latent(n, generator)
        latent_other = self.bundle.mapping.sample_latent(n, generator)
        return Draws(
            target=target,
            latent=latent,
            latent_other=latent_other,
            reference=references(rng, target),
            reference_other=references(rng, target),
        )

    def _pitch(self, mel: torch.Tensor) -> tuple[torch.Tensor | None, torch.Tensor | None]:
        if not self.use_f0:
            return None, None
        return self.bundle.f0_net(mel)

    def discriminator_phase(self, batch: Batch, draws: Draws) -> PhaseResult:
        b = self.bundle
        device = batch.mel.device
        target = draws.target.to(device)
        with torch.no_grad():
            _, features = self._pitch(batch.mel)
            style = b.mapping(draws.latent.to(device), target)
            fake = b.generator(batch.mel, features, style)

        real_logits = b.discriminator.discriminate(batch.mel, batch.speaker)
        fake_logits = b.discriminator.discriminate(fake, target)
        speaker_logits = b.speaker_classifier(fake) if self.use_speaker_classifier else None
        terms = discriminator_losses(
            real_logits, fake_logits, speaker_logits, batch.speaker, target
        )
        flags: dict[str, bool] = {}
        if self.weights.is_active("emod"):
            terms["emod"], flags["emotion_labels"] = loss_emod(
                b.emotion_classifier(batch.mel), batch.emotion
            )
        return PhaseResult(total_discriminator_loss(terms, self.weights), terms, flags)

    def _styles(self, draws: Draws, source: str, target: torch.Tensor):
        b = self.bundle
        if source == "latent":
            device = target.device
            return (
                b.mapping(draws.latent.to(device), target),
                b.mapping(draws.latent_other.to(device), target),
            )
        return (
            b.style_encoder(draws.reference.to(target.device), target),
            b.style_encoder(draws.reference_other.to(target.device), target),
        )

    def _generator_terms(
        self, batch: Batch, target: torch.Tensor, style: torch.Tensor, style_other: torch.Tensor
    ) -> tuple[dict[str, torch.Tensor], dict[str, bool]]:
        b = self.bundle
        w = self.weights
        real = batch.mel
        with torch.no_grad():
            f0_real, features = self._pitch(real)
            ling_real = b.ling_net(real)

        fake = b.generator(real, features, style)
        fake_other = b.generator(real, features, style_other) if w.is_active("ds") else None
        f0_fake, features_fake = self._pitch(fake)
        source_style = b.style_encoder(real, batch.speaker)
        ctx = GeneratorContext(
            real=real,
            fake=fake,
            fake_logits=b.discriminator.discriminate(fake, target),
            target_style=style,
            predicted_style=b.style_encoder(fake, target),
            ling_real=ling_real,
            ling_fake=b.ling_net(fake),
            reconstructed=b.generator(fake, features_fake, source_style),
            source_speaker=batch.speaker,
            target_speaker=target,
            fake_other=fake_other,
            f0_real=f0_real,
            f0_fake=f0_fake,
            speaker_logits_on_fake=(
                b.speaker_classifier(fake) if self.use_speaker_classifier else None
            ),
        )
        terms = base_stargan_losses(ctx, need_diversity=w.is_active("ds"))
        flags: dict[str, bool] = {}

        if w.is_active("emog"):
            terms["emog"], flags["emotion_labels"] = loss_emog(
                b.emotion_classifier(fake), batch.emotion
            )
        if w.is_active("af"):
            terms["af"], counts = acoustic_feature_loss(
                real,
                fake,
                batch.voiced,
                self.kinds,
                self.center_freqs.to(real.device),
                self.window_len,
                src_f0=f0_real,
                conv_f0=f0_fake,
                eps=self.cfg.descriptors.eps,
                floor=self.cfg.audio.floor,
            )
            flags["af_windows"] = sum(counts.values()) > 0
        if w.is_active("embed"):
            if b.extractor is None:
                raise ValueError("embedding loss is active but the bundle has no extractor")
            with torch.no_grad():
                source_embedding = b.extractor(real)
            terms["embed"] = loss_embed(source_embedding, b.extractor(fake))
        return terms, flags

    def generator_phase(self, batch: Batch, draws: Draws) -> PhaseResult:
        """Mapped-style and reference-style passes; their records are summed."""
        target = draws.target.to(batch.mel.device)
        summed: dict[str, torch.Tensor] = {}
        flags: dict[str, bool] = {}
        for source in STYLE_SOURCES:
            style, style_other = self._styles(draws, source, target)
            terms, pass_flags = self._generator_terms(batch, target, style, style_other)
            for name, value in terms.items():
                summed[name] = summed[name] + value if name in summed else value
            flags.update(pass_flags)
        return PhaseResult(total_generator_loss(summed, self.weights), summed, flags)


def set_phase(bundle: ModelBundle, phase: str, trainable: tuple[str, ...]) -> None:
    """Enable gradients for the trainable networks of one phase only."""
    own = GENERATOR_SIDE if phase == "generator" else DISCRIMINATOR_SIDE
    for name in (*GENERATOR_SIDE, *DISCRIMINATOR_SIDE):
        bundle.set_requires_grad((name,), name in own and name in trainable)
    bundle.set_requires_grad(("f0_net", "ling_net"), False)
    if bundle.extractor is not None:
        for p in bundle.extractor.parameters():
            p.requires_grad_(False)
