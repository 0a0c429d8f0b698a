"""Stage I: adversarial emotion conversion whose style encoder seeds the extractor."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch

from ..audio.manifest import DatasetManifest, ManifestEntry
from ..config import Config, snapshot_config
from ..errors import CheckpointError, DatasetError
from ..models import Generator, StyleEncoder
from ..training.data import ClipDataset
from ..logging_config import StepLogWriter
from ..training.trainer import STEP_LOG, VCTrainer, configure_determinism, resume_state

logger = logging.getLogger(__name__)

# pitch conditioning, the speaker classifier and every emotion-preserving term are off
STAGE1_DISABLED = ("af", "embed", "emog", "emod", "f0", "aspk", "spk")


def emotion_entries(manifest: DatasetManifest) -> list[ManifestEntry]:
    """Training entries re-coded so that the emotion is the conversion domain."""
    entries = manifest.split("train")
    unlabelled = [e.audio_path for e in entries if not e.is_labelled]
    if unlabelled:
        raise DatasetError(
            f"emotion embedding training needs labels; {len(unlabelled)} entries have none "
            f"(first: {unlabelled[0]})"
        )
    classes = {e.emotion_label for e in entries}
    if len(classes) < 2:
        raise DatasetError(f"need at least 2 emotion classes, found {sorted(classes)}")
    return [e.model_copy(update={"speaker_code": e.emotion_code}) for e in entries]


def train_val_split(
    entries: list[ManifestEntry], val_fraction: float, seed: int
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """Per-emotion shuffled split; every class keeps at least one training clip."""
    rng = np.random.default_rng(seed)
    train, val = [], []
    for label in sorted({e.emotion_label for e in entries}):
        group = [e for e in entries if e.emotion_label == label]
        order = rng.permutation(len(group))
        n_val = min(int(round(val_fraction * len(group))), len(group) - 1)
        val += [group[i] for i in order[:n_val]]
        train += [group[i] for i in order[n_val:]]
    return train, val


def stage1_config(cfg: Config) -> Config:
    disabled = sorted(set(cfg.losses.disabled) | set(STAGE1_DISABLED))
    return cfg.model_copy(update={"losses": cfg.losses.model_copy(update={"disabled": disabled})})


def train_stage1(
    cfg: Config,
    manifest: DatasetManifest,
    out_dir: str | Path,
    max_steps: int | None = None,
    resume: bool = False,
) -> StyleEncoder:
    """Emotion-conversion training with emotions as domains; returns the style encoder.

    The encoder and the generator are saved under ``out_dir`` as
    ``style_encoder.pt`` and ``generator.pt``. With ``resume`` the run continues
    from ``out_dir/checkpoints/latest`` when it exists.
    """
    out_dir = Path(out_dir)
    configure_determinism(cfg)
    stage_cfg = stage1_config(cfg)
    snapshot_config(stage_cfg, out_dir)

    train, val = train_val_split(
        emotion_entries(manifest), cfg.embedding.val_fraction, cfg.training.seed
    )
    logger.info(f"Stage I: {len(train)} training / {len(val)} validation clips")
    dataset = ClipDataset(manifest, stage_cfg, entries=train, cache_dir=out_dir / "cache")
    state = resume_state(stage_cfg, out_dir) if resume else None
    if state is not None:
        StepLogWriter(out_dir / STEP_LOG).truncate_after(state.step)
    trainer = VCTrainer(
        stage_cfg,
        dataset,
        out_dir,
        state=state,
        use_f0=False,
        use_speaker_classifier=False,
        name="stage1",
        n_domains=cfg.models.n_emotions,
    )
    state = trainer.fit(max_steps or cfg.embedding.stage1_steps)

    bundle = state.bundle
    if val:
        val_set = ClipDataset(manifest, stage_cfg, entries=val, cache_dir=out_dir / "cache")
        mae = reconstruction_mae(bundle, val_set)
        logger.info(f"Stage I validation reconstruction MAE: {mae:.4f}")

    torch.save(bundle.style_encoder.state_dict(), out_dir / "style_encoder.pt")
    torch.save(bundle.generator.state_dict(), out_dir / "generator.pt")
    return bundle.style_encoder


@torch.no_grad()
def reconstruction_mae(bundle, dataset: ClipDataset, batch_size: int = 16) -> float:
    """Mean |G(X, SE(X, e)) - X| over a clip set, each clip styled by its own emotion."""
    errors = []
    for batch in dataset.iter_batches(batch_size):
        style = bundle.style_encoder(batch.mel, batch.speaker)
        rebuilt = bundle.generator(batch.mel, None, style)
        errors.append((rebuilt - batch.mel).abs().mean(dim=(1, 2)))
    return float(torch.cat(errors).mean())


def load_stage1(cfg: Config, directory: str | Path) -> tuple[StyleEncoder, Generator]:
    """Style encoder and generator saved by :func:`train_stage1`."""
    directory = Path(directory)
    encoder = StyleEncoder(cfg.models.n_emotions, cfg.models)
    generator = Generator(cfg.audio.n_mels, cfg.models, use_f0=False)
    for module, name in ((encoder, "style_encoder.pt"), (generator, "generator.pt")):
        path = directory / name
        if not path.exists():
            raise CheckpointError(f"Stage I artefact {path} is missing; run stage 1 first")
        module.load_state_dict(torch.load(path, map_location="cpu"))
    return encoder, generator
