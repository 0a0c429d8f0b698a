"""Emotion-correlated acoustic descriptors: differentiable kernels, oracles and voicing."""

from .kernels import (
    a_weighting_gains,
    delta_f0,
    loudness,
    spectral_centroid,
    spectral_kurtosis,
)
from .kinds import ALL_KINDS, DescriptorKind
from .pitch import F0Contour, VoicingMask, oracle_f0, voicing_mask
from .series import DescriptorSeries, descriptor_series, retention_mask, window_values

__all__ = [
    "ALL_KINDS",
    "DescriptorKind",
    "DescriptorSeries",
    "F0Contour",
    "VoicingMask",
    "a_weighting_gains",
    "delta_f0",
    "descriptor_series",
    "loudness",
    "oracle_f0",
    "retention_mask",
    "spectral_centroid",
    "spectral_kurtosis",
    "voicing_mask",
    "window_values",
]
