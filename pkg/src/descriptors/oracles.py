"""Brute-force reference implementations of the descriptors.

Plain loops over bands and frames in float64 with the analytic A-weighting
formula. Used by the tests, the SVM feature extractor and the feature dump;
never on a gradient path.
"""

from __future__ import annotations

import math

import numpy as np

A_WEIGHT_POLES = (20.598997, 107.65265, 737.86223, 12194.217)
A_WEIGHT_OFFSET_DB = 2.0


def a_weighting_power(freq_hz: float) -> float:
    """Analytic A-weighting power gain, normalized to 0 dB near 1 kHz."""
    f2 = freq_hz * freq_hz
    p1, p2, p3, p4 = (p * p for p in A_WEIGHT_POLES)
    response = p4 * f2 * f2 / ((f2 + p1) * math.sqrt((f2 + p2) * (f2 + p3)) * (f2 + p4))
    return response * response * 10.0 ** (A_WEIGHT_OFFSET_DB / 10.0)


def _band_sums(mel_window: np.ndarray) -> list[float]:
    n_bands, n_frames = mel_window.shape
    sums = []
    for b in range(n_bands):
        acc = 0.0
        for t in range(n_frames):
            acc += float(mel_window[b, t])
        sums.append(acc)
    return sums


def centroid_oracle(mel_window: np.ndarray, center_freqs: np.ndarray, eps: float = 1e-8) -> float:
    energies = _band_sums(mel_window)
    total = sum(energies)
    if total <= eps:
        return float(sum(center_freqs) / len(center_freqs))
    return sum(f * e for f, e in zip(center_freqs, energies, strict=True)) / total


def kurtosis_oracle(mel_window: np.ndarray, center_freqs: np.ndarray, eps: float = 1e-8) -> float:
    energies = _band_sums(mel_window)
    total = max(sum(energies), eps)
    freqs = [f / 1000.0 for f in center_freqs]
    probs = [e / total for e in energies]
    mean = sum(p * f for p, f in zip(probs, freqs, strict=True))
    var = sum(p * (f - mean) ** 2 for p, f in zip(probs, freqs, strict=True))
    if var <= eps:
        return 0.0
    fourth = sum(p * (f - mean) ** 4 for p, f in zip(probs, freqs, strict=True))
    return fourth / var**2


def loudness_oracle(mel_window: np.ndarray, center_freqs: np.ndarray, floor: float = 1e-5) -> float:
    energies = _band_sums(mel_window)
    weighted = sum(a_weighting_power(f) * e for f, e in zip(center_freqs, energies, strict=True))
    return 10.0 * math.log10(weighted + floor)


def delta_f0_oracle(f0_window: np.ndarray, voiced_window: np.ndarray) -> float | None:
    """Mean of log-F0 differences between successive voiced frames; None if < 2 voiced."""
    voiced_logs = [
        math.log(max(float(f), 1.0))
        for f, v in zip(f0_window, voiced_window, strict=True)
        if v
    ]
    if len(voiced_logs) < 2:
        return None
    diffs = [b - a for a, b in zip(voiced_logs[:-1], voiced_logs[1:], strict=True)]
    return sum(diffs) / len(diffs)


def oracle_series(
    kind: str,
    log_mel: np.ndarray,
    center_freqs: np.ndarray,
    voiced: np.ndarray,
    window_len: int,
    f0: np.ndarray | None = None,
    eps: float = 1e-8,
    floor: float = 1e-5,
) -> list[tuple[int, float]]:
    """(window index, value) for every retained window, by exhaustive enumeration."""
    n_frames = log_mel.shape[1]
    hop = window_len // 2
    out: list[tuple[int, float]] = []
    index = 0
    start = 0
    while start + window_len <= n_frames:
        stop = start + window_len
        window_voiced = voiced[start:stop]
        if np.count_nonzero(window_voiced) * 2 >= window_len:
            energy = np.exp(log_mel[:, start:stop])
            if kind == "spectral_centroid":
                out.append((index, centroid_oracle(energy, center_freqs, eps)))
            elif kind == "spectral_kurtosis":
                out.append((index, kurtosis_oracle(energy, center_freqs, eps)))
            elif kind == "loudness":
                out.append((index, loudness_oracle(energy, center_freqs, floor)))
            elif kind == "delta_f0":
                if f0 is None:
                    raise ValueError("delta_f0 requires an F0 contour")
                value = delta_f0_oracle(f0[start:stop], window_voiced)
                if value is not None:
                    out.append((index, value))
            else:
                raise ValueError(f"Unknown descriptor kind {kind!r}")
        index += 1
        start += hop
    return out
