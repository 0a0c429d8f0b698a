"""Differentiable descriptor kernels on mel-band energies.

Every kernel takes linear mel energy (``exp`` of the log-mel) shaped
``[..., n_mels, window_len]`` and reduces the last two axes to one value per
window, so the same code serves single windows, per-utterance window stacks
and whole training batches. Frequencies are mel band centres in Hz.
"""

from __future__ import annotations

import librosa
import numpy as np
import torch

DEFAULT_EPS = 1e-8
DEFAULT_FLOOR = 1e-5


def a_weighting_gains(center_freqs: np.ndarray | torch.Tensor) -> torch.Tensor:
    """Linear power gains of the A-weighting curve at the given frequencies."""
    freqs = np.asarray(
        center_freqs.detach().cpu().numpy() if torch.is_tensor(center_freqs) else center_freqs,
        dtype=np.float64,
    )
    db = librosa.A_weighting(np.maximum(freqs, 1e-3), min_db=None)
    return torch.from_numpy(10.0 ** (db / 10.0))


def band_energy(mel_window: torch.Tensor) -> torch.Tensor:
    """Window-summed energy per band: [..., M, L] -> [..., M]."""
    return mel_window.sum(dim=-1)


def _freqs_like(center_freqs: np.ndarray | torch.Tensor, ref: torch.Tensor) -> torch.Tensor:
    return torch.as_tensor(center_freqs, dtype=ref.dtype, device=ref.device)


def spectral_centroid(
    mel_window: torch.Tensor, center_freqs: np.ndarray | torch.Tensor, eps: float = DEFAULT_EPS
) -> torch.Tensor:
    """Energy-weighted mean band frequency in Hz.

    A window whose total energy is below ``eps`` returns the centroid of a
    flat spectrum (the mean band frequency).
    """
    energy = band_energy(mel_window)
    freqs = _freqs_like(center_freqs, energy)
    total = energy.sum(dim=-1)
    centroid = (energy * freqs).sum(dim=-1) / total.clamp_min(eps)
    flat = freqs.mean().expand_as(total)
    return torch.where(total > eps, centroid, flat)


def spectral_kurtosis(
    mel_window: torch.Tensor, center_freqs: np.ndarray | torch.Tensor, eps: float = DEFAULT_EPS
) -> torch.Tensor:
    """Non-excess kurtosis E[(f - mu)^4] / sigma^4 of the band-energy distribution.

    Degenerate spectra (variance below ``eps``) are defined to have kurtosis 0.
    """
    energy = band_energy(mel_window)
    # kHz keeps the fourth powers well inside float32 range; kurtosis is scale-free
    freqs = _freqs_like(center_freqs, energy) / 1000.0
    total = energy.sum(dim=-1, keepdim=True).clamp_min(eps)
    weights = energy / total
    mean = (weights * freqs).sum(dim=-1, keepdim=True)
    centred = freqs - mean
    var = (weights * centred**2).sum(dim=-1)
    fourth = (weights * centred**4).sum(dim=-1)
    kurtosis = fourth / var.clamp_min(eps) ** 2
    return torch.where(var > eps, kurtosis, torch.zeros_like(kurtosis))


def loudness(
    mel_window: torch.Tensor,
    center_freqs: np.ndarray | torch.Tensor,
    floor: float = DEFAULT_FLOOR,
    gains: torch.Tensor | None = None,
) -> torch.Tensor:
    """A-weighted window energy in dB: 10 log10(sum_b A(f_b) E_b + floor)."""
    energy = band_energy(mel_window)
    if gains is None:
        gains = a_weighting_gains(center_freqs)
    gains = gains.to(dtype=energy.dtype, device=energy.device)
    return 10.0 * torch.log10((gains * energy).sum(dim=-1) + floor)


def delta_f0(
    f0_window: torch.Tensor, voiced_window: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """Mean first difference of ln(f0) across the voiced frames of each window.

    Args:
        f0_window: [..., L] F0 in Hz.
        voiced_window: [..., L] boolean voicing (treated as a constant).

    Returns:
        (values, valid): ``valid`` is False for windows with fewer than two
        voiced frames; their value is 0.
    """
    voiced = voiced_window.to(torch.bool)
    length = voiced.shape[-1]
    log_f0 = torch.log(f0_window.clamp_min(1.0))
    positions = torch.arange(length, device=voiced.device).expand_as(voiced)

    # consecutive voiced differences telescope to (last - first) / (count - 1)
    first = torch.where(voiced, positions, length).min(dim=-1).values.clamp_max(length - 1)
    last = torch.where(voiced, positions, -1).max(dim=-1).values.clamp_min(0)
    count = voiced.sum(dim=-1)
    span = log_f0.gather(-1, last.unsqueeze(-1)).squeeze(-1) - log_f0.gather(
        -1, first.unsqueeze(-1)
    ).squeeze(-1)
    valid = count >= 2
    values = span / (count - 1).clamp_min(1).to(log_f0.dtype)
    return torch.where(valid, values, torch.zeros_like(values)), valid


def unfold_windows(x: torch.Tensor, window_len: int) -> torch.Tensor:
    """Split the trailing time axis into 50%-overlapping windows.

    [..., T] -> [..., n_windows, window_len], trailing partial window dropped.
    """
    return x.unfold(-1, window_len, window_len // 2)


def mel_windows(log_mel: torch.Tensor, window_len: int) -> torch.Tensor:
    """Linear energy windows of a log-mel batch: [..., M, T] -> [..., n_windows, M, L]."""
    energy = torch.exp(log_mel)
    return unfold_windows(energy, window_len).transpose(-3, -2)
