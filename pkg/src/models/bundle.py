"""The checkpoint unit: every network of a run plus its config hash and step."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch import nn

from ..config import Config, LossWeights, config_hash
from .discriminator import DomainClassifier
from .f0_net import F0Net
from .generator import Generator
from .ling_net import LingNet
from .style import MappingNetwork, StyleEncoder

logger = logging.getLogger(__name__)

GENERATOR_SIDE = ("generator", "style_encoder", "mapping")
DISCRIMINATOR_SIDE = ("discriminator", "speaker_classifier", "emotion_classifier")
FROZEN = ("f0_net", "ling_net")
COMPONENTS = GENERATOR_SIDE + DISCRIMINATOR_SIDE + FROZEN


@dataclass
class ModelBundle:
    generator: Generator
    style_encoder: StyleEncoder
    mapping: MappingNetwork
    discriminator: DomainClassifier
    speaker_classifier: DomainClassifier
    emotion_classifier: DomainClassifier
    f0_net: F0Net
    ling_net: LingNet
    config_hash: str
    n_domains: int
    step: int = 0
    extractor: nn.Module | None = None

    def components(self) -> dict[str, nn.Module]:
        modules = {name: getattr(self, name) for name in COMPONENTS}
        if self.extractor is not None:
            modules["extractor"] = self.extractor
        return modules

    def parameter_counts(self) -> dict[str, int]:
        return {
            name: sum(p.numel() for p in module.parameters())
            for name, module in self.components().items()
        }

    def parameters_of(self, names: tuple[str, ...] | list[str]) -> list[nn.Parameter]:
        return [p for name in names for p in getattr(self, name).parameters()]

    def set_requires_grad(self, names: tuple[str, ...] | list[str], flag: bool) -> None:
        for p in self.parameters_of(names):
            p.requires_grad_(flag)

    def to(self, device: str | torch.device) -> ModelBundle:
        for module in self.components().values():
            module.to(device)
        return self

    def non_finite_components(self) -> list[str]:
        return [
            name
            for name, module in self.components().items()
            if any(not torch.isfinite(p).all() for p in module.parameters())
        ]


def trainable_components(weights: LossWeights) -> tuple[str, ...]:
    """Networks updated during voice-conversion training.

    The emotion classifier only trains when one of its two losses is active;
    everything else matches the baseline recipe.
    """
    names = list(GENERATOR_SIDE) + ["discriminator", "speaker_classifier"]
    if weights.is_active("emod") or weights.is_active("emog"):
        names.append("emotion_classifier")
    return tuple(names)


def build_bundle(cfg: Config, n_domains: int, use_f0: bool = True) -> ModelBundle:
    """Fresh networks, initialised deterministically from the run seed."""
    torch.manual_seed(cfg.training.seed)
    n_mels = cfg.audio.n_mels
    models = cfg.models
    bundle = ModelBundle(
        generator=Generator(n_mels, models, use_f0=use_f0),
        style_encoder=StyleEncoder(n_domains, models),
        mapping=MappingNetwork(n_domains, models),
        discriminator=DomainClassifier(n_domains, models),
        speaker_classifier=DomainClassifier(n_domains, models),
        emotion_classifier=DomainClassifier(models.n_emotions, models),
        f0_net=F0Net(n_mels, models),
        ling_net=LingNet(n_mels, models),
        config_hash=config_hash(cfg),
        n_domains=n_domains,
    )
    counts = bundle.parameter_counts()
    logger.debug(f"Built bundle for {n_domains} domains: {counts}")
    return bundle
