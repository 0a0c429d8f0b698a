"""Desk-scale networks of the voice-conversion framework."""

from .bundle import (
    COMPONENTS,
    DISCRIMINATOR_SIDE,
    FROZEN,
    GENERATOR_SIDE,
    ModelBundle,
    build_bundle,
    trainable_components,
)
from .discriminator import DomainClassifier
from .f0_net import F0Net
from .generator import Generator
from .ling_net import LingNet
from .style import MappingNetwork, StyleEncoder

__all__ = [
    "COMPONENTS",
    "DISCRIMINATOR_SIDE",
    "FROZEN",
    "GENERATOR_SIDE",
    "DomainClassifier",
    "F0Net",
    "Generator",
    "LingNet",
    "MappingNetwork",
    "ModelBundle",
    "StyleEncoder",
    "build_bundle",
    "trainable_components",
]
