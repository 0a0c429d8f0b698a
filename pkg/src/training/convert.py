"""Inference: convert one utterance, or a whole manifest split, towards target speakers."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import torch

from ..audio.io import load_waveform, resample, save_waveform
from ..audio.manifest import DatasetManifest, Split
from ..audio.mel import MelFrontEnd
from ..audio.types import MelSpectrogram, Waveform
from ..config import Config
from ..errors import AudioFormatError, DatasetError
from ..models.layers import check_codes
from .checkpoint import TrainState

logger = logging.getLogger(__name__)


def _as_mel(waveform: Waveform, front_end: MelFrontEnd) -> torch.Tensor:
    if waveform.sample_rate != front_end.cfg.sample_rate:
        waveform = resample(waveform, front_end.cfg.sample_rate)
    return torch.from_numpy(front_end.log_mel(waveform).values.astype(np.float32)).unsqueeze(0)


@torch.no_grad()
def convert_mel(
    state: TrainState,
    mel: torch.Tensor,
    target: int,
    reference: torch.Tensor | None = None,
    latent_seed: int = 0,
) -> torch.Tensor:
    """[M, T] or [1, M, T] source mel -> [M, T] converted mel (same frame count)."""
    bundle = state.bundle
    if mel.ndim == 2:
        mel = mel.unsqueeze(0)
    code = check_codes(torch.tensor([target]), bundle.n_domains, "speaker")
    device = next(bundle.generator.parameters()).device
    mel, code = mel.to(device), code.to(device)
    for module in bundle.components().values():
        module.eval()

    if reference is not None:
        if reference.ndim == 2:
            reference = reference.unsqueeze(0)
        style = bundle.style_encoder(reference.to(device), code)
    else:
        latent = bundle.mapping.sample_latent(1, torch.Generator().manual_seed(latent_seed))
        style = bundle.mapping(latent.to(device), code)
    features = bundle.f0_net(mel)[1] if state.use_f0 else None
    return bundle.generator(mel, features, style)[0].cpu()


def convert(
    state: TrainState,
    source: Waveform,
    target: int,
    cfg: Config,
    reference: Waveform | None = None,
    latent_seed: int = 0,
) -> tuple[MelSpectrogram, Waveform]:
    """Converted log-mel plus its Griffin-Lim waveform.

    The style comes from ``reference`` when given, otherwise from a mapped
    latent drawn with ``latent_seed``.
    """
    front_end = MelFrontEnd(cfg.audio)
    mel = _as_mel(source, front_end)
    if mel.shape[-1] < cfg.descriptors.window_len:
        raise AudioFormatError(
            f"source has {mel.shape[-1]} frames, shorter than one descriptor window "
            f"({cfg.descriptors.window_len})"
        )
    ref_mel = _as_mel(reference, front_end) if reference is not None else None
    converted = convert_mel(state, mel, target, ref_mel, latent_seed)

    values = converted.numpy().astype(np.float64)
    out_mel = MelSpectrogram(
        values=values, mel_center_freqs=front_end.center_freqs, hop_seconds=front_end.hop_seconds
    )
    waveform = front_end.to_waveform(out_mel, seed=latent_seed)
    logger.info(f"Converted {mel.shape[-1]} frames to speaker {target}")
    return out_mel, waveform


def convert_split(
    state: TrainState,
    manifest: DatasetManifest,
    cfg: Config,
    out_dir: str | Path,
    split: Split = "test",
    seed: int = 0,
) -> Path:
    """Convert every clip of a split to a randomly drawn other speaker.

    Writes the converted WAVs plus ``pairs.jsonl`` (one record per source
    clip, paths relative to ``out_dir``) and returns the pairs file.
    """
    entries = manifest.split(split)
    if not entries:
        raise DatasetError(f"split '{split}' of the manifest is empty")
    if manifest.n_speakers < 2:
        raise DatasetError("conversion needs at least two speakers")

    out_dir = Path(out_dir)
    (out_dir / "converted").mkdir(parents=True, exist_ok=True)
    speakers = {e.speaker_code: e for e in manifest.entries}
    rng = np.random.default_rng(seed)

    records = []
    for index, entry in enumerate(entries):
        others = sorted(code for code in speakers if code != entry.speaker_code)
        target = int(rng.choice(others))
        source_path = manifest.resolve(entry).resolve()
        source = load_waveform(source_path)
        _, waveform = convert(state, source, target, cfg, latent_seed=seed + index)
        name = f"{Path(entry.audio_path).stem}_to{speakers[target].speaker_id}.wav"
        save_waveform(waveform, out_dir / "converted" / name)
        records.append(
            {
                "pair_id": f"{index:05d}",
                "source_path": str(source_path),
                "converted_path": f"converted/{name}",
                "source_speaker": entry.speaker_id,
                "target_speaker": speakers[target].speaker_id,
                "emotion_label": entry.emotion_label,
                "transcript": entry.transcript,
                "source_gender": entry.gender,
                "target_gender": speakers[target].gender,
                "source_accent": entry.accent,
                "target_accent": speakers[target].accent,
            }
        )

    pairs_path = out_dir / "pairs.jsonl"
    with open(pairs_path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps({k: v for k, v in record.items() if v is not None}) + "\n")
    logger.info(f"Converted {len(records)} '{split}' clips -> {pairs_path}")
    return pairs_path
