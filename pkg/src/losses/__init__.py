"""Loss terms of the emotion-preserving voice-conversion objective."""

from .acoustic import acoustic_feature_loss, loss_af
from .embed import loss_embed
from .emotion import UNLABELLED, emotion_cross_entropy, loss_emod, loss_emog
from .stargan import (
    GeneratorContext,
    base_stargan_losses,
    discriminator_adversarial,
    discriminator_losses,
    generator_adversarial,
    normalize_f0,
)
from .totals import (
    DISCRIMINATOR_TERMS,
    GENERATOR_TERMS,
    LossReport,
    total_discriminator_loss,
    total_generator_loss,
)

__all__ = [
    "DISCRIMINATOR_TERMS",
    "GENERATOR_TERMS",
    "UNLABELLED",
    "GeneratorContext",
    "LossReport",
    "acoustic_feature_loss",
    "base_stargan_losses",
    "discriminator_adversarial",
    "discriminator_losses",
    "emotion_cross_entropy",
    "generator_adversarial",
    "loss_af",
    "loss_embed",
    "loss_emod",
    "loss_emog",
    "normalize_f0",
    "total_discriminator_loss",
    "total_generator_loss",
]
