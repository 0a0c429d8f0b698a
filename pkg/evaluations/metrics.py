"""Metric kernels: pitch correlation, embedding MAE, CER, EER and the paired t-test."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import jiwer
import numpy as np
from scipy import stats

from src.audio.types import Waveform
from src.config import MelConfig
from src.descriptors.pitch import F0Contour, oracle_f0

logger = logging.getLogger(__name__)

MIN_JOINT_VOICED = 10


@dataclass(slots=True)
class PitchCorrelation:
    value: float | None
    joint_voiced: int

    @property
    def flagged(self) -> bool:
        return self.value is None


def contour_correlation(
    f0_a: np.ndarray, f0_b: np.ndarray, min_frames: int = MIN_JOINT_VOICED
) -> PitchCorrelation:
    """Pearson correlation over frames voiced (F0 > 0) in both contours.

    Contours of different length are compared over their common prefix.
    Fewer than ``min_frames`` jointly voiced frames, or a constant contour,
    yields a flagged result without a value.
    """
    n = min(len(f0_a), len(f0_b))
    a = np.asarray(f0_a[:n], dtype=np.float64)
    b = np.asarray(f0_b[:n], dtype=np.float64)
    joint = (a > 0) & (b > 0)
    count = int(joint.sum())
    if count < min_frames:
        return PitchCorrelation(None, count)
    a = a[joint] - a[joint].mean()
    b = b[joint] - b[joint].mean()
    if np.allclose(a, 0.0) or np.allclose(b, 0.0):
        return PitchCorrelation(None, count)
    return PitchCorrelation(float(stats.pearsonr(a, b).statistic), count)


def pitch_correlation(
    source: Waveform | F0Contour,
    converted: Waveform | F0Contour,
    cfg: MelConfig | None = None,
    min_frames: int = MIN_JOINT_VOICED,
) -> PitchCorrelation:
    """PCC of the reference pitch tracks of two utterances."""
    src = source if isinstance(source, F0Contour) else oracle_f0(source, cfg)
    conv = converted if isinstance(converted, F0Contour) else oracle_f0(converted, cfg)
    return contour_correlation(src.f0_hz, conv.f0_hz, min_frames)


def embedding_mae(source: np.ndarray, converted: np.ndarray) -> float:
    source = np.asarray(source, dtype=np.float64)
    converted = np.asarray(converted, dtype=np.float64)
    if source.shape != converted.shape:
        raise ValueError(f"embedding shapes differ: {source.shape} vs {converted.shape}")
    return float(np.mean(np.abs(converted - source)))


def character_error_rate(reference: str, hypothesis: str) -> float:
    """Character edit distance divided by the reference length."""
    if not reference:
        raise ValueError("reference transcription is empty")
    if not hypothesis:
        return 1.0
    return float(jiwer.cer(reference, hypothesis))


def error_rates(
    genuine: np.ndarray, impostor: np.ndarray, threshold: float
) -> tuple[float, float]:
    """(false acceptance, false rejection) when accepting scores >= threshold."""
    far = float(np.mean(impostor >= threshold))
    frr = float(np.mean(genuine < threshold))
    return far, frr


def equal_error_rate(genuine: Sequence[float], impostor: Sequence[float]) -> float:
    """Crossing point of the FAR/FRR curves swept over every distinct score.

    Between the two operating points that bracket the crossing the rates are
    interpolated linearly.
    """
    genuine_arr = np.asarray(genuine, dtype=np.float64)
    impostor_arr = np.asarray(impostor, dtype=np.float64)
    if genuine_arr.size == 0 or impostor_arr.size == 0:
        raise ValueError("EER needs at least one genuine and one impostor score")

    thresholds = [-math.inf, *np.unique(np.concatenate([genuine_arr, impostor_arr])), math.inf]
    previous = (1.0, 0.0)
    for threshold in thresholds:
        far, frr = error_rates(genuine_arr, impostor_arr, threshold)
        if frr == far:
            return far
        if frr > far:
            prev_far, prev_frr = previous
            gap_before = prev_far - prev_frr
            gap_after = far - frr
            alpha = gap_before / (gap_before - gap_after)
            return float(prev_far + alpha * (far - prev_far))
        previous = (far, frr)
    raise AssertionError("FAR/FRR curves never cross")


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Paired t statistic and two-sided p-value of ``a - b``."""
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if a_arr.shape != b_arr.shape:
        raise ValueError("paired samples must have equal length")
    if a_arr.size < 2:
        raise ValueError("paired t-test needs at least two pairs")
    result = stats.ttest_rel(a_arr, b_arr)
    return float(result.statistic), float(result.pvalue)


def column_stats(values: Sequence[float]) -> tuple[float, float] | None:
    """Mean and population standard deviation, or ``None`` for no values."""
    if not values:
        return None
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())
