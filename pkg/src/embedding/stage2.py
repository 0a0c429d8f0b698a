"""Stage II: fine-tune the extractor's classifier and heads, keep the best validation checkpoint."""

from __future__ import annotations

import copy
import logging
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from pydantic import BaseModel, Field

from ..audio.manifest import DatasetManifest
from ..config import Config
from ..errors import ConfigError, DatasetError
from ..logging_config import StepLogWriter
from ..models import Generator
from ..training.checkpoint import load_loop_state, save_loop_state
from ..training.data import ClipDataset
from .extractor import EmbeddingExtractor
from .stage1 import emotion_entries, train_val_split

logger = logging.getLogger(__name__)


class ValidationPoint(BaseModel):
    """Validation scores of one Stage-II evaluation."""

    step: int = Field(ge=0)
    val_ce: float
    val_accuracy: float = Field(ge=0.0, le=1.0)
    val_embedding_mae: float
    val_recon_mae: float | None = None


def select_best(curve: list[ValidationPoint], criterion: str = "val_ce") -> ValidationPoint:
    """Point with the lowest value of ``criterion`` (earliest on ties)."""
    if not curve:
        raise ValueError("validation curve is empty")
    scored = [p for p in curve if getattr(p, criterion) is not None]
    if not scored:
        raise ValueError(f"no validation point reports {criterion}")
    return min(scored, key=lambda p: (getattr(p, criterion), p.step))


@torch.no_grad()
def validate(
    extractor: EmbeddingExtractor,
    dataset: ClipDataset,
    step: int,
    generator: Generator | None = None,
    batch_size: int = 16,
) -> ValidationPoint:
    """Cross-entropy, accuracy, embedding spread and optional reconstruction error.

    ``val_embedding_mae`` is the mean absolute distance of each clip's
    embedding to the mean embedding of its emotion class. ``val_recon_mae``
    rebuilds each clip with the Stage-I generator styled by its own
    embedding.
    """
    was_training = extractor.training
    extractor.eval()
    logits, labels, embeddings, recon = [], [], [], []
    for batch in dataset.iter_batches(batch_size):
        logits.append(extractor.logits(batch.mel))
        embedding = extractor(batch.mel)
        embeddings.append(embedding)
        labels.append(batch.emotion)
        if generator is not None:
            rebuilt = generator(batch.mel, None, embedding)
            recon.append((rebuilt - batch.mel).abs().mean(dim=(1, 2)))
    extractor.train(was_training)

    logits_t, labels_t, emb_t = torch.cat(logits), torch.cat(labels), torch.cat(embeddings)
    spread = []
    for label in labels_t.unique():
        members = emb_t[labels_t == label]
        spread.append((members - members.mean(dim=0, keepdim=True)).abs().mean(dim=1))
    return ValidationPoint(
        step=step,
        val_ce=float(F.cross_entropy(logits_t, labels_t)),
        val_accuracy=float((logits_t.argmax(dim=-1) == labels_t).float().mean()),
        val_embedding_mae=float(torch.cat(spread).mean()),
        val_recon_mae=float(torch.cat(recon).mean()) if recon else None,
    )


def train_stage2(
    extractor: EmbeddingExtractor,
    cfg: Config,
    manifest: DatasetManifest,
    out_dir: str | Path,
    generator: Generator | None = None,
    max_steps: int | None = None,
    resume: bool = False,
) -> EmbeddingExtractor:
    """Cross-entropy fine-tuning with a frozen trunk; returns the best validated extractor.

    The loop is checkpointed at every validation under ``out_dir/checkpoints/stage2``
    together with the validation curve and the best weights so far.
    """
    out_dir = Path(out_dir)
    criterion = cfg.embedding.selection_criterion
    if criterion == "val_recon_mae" and generator is None:
        raise ConfigError("val_recon_mae selection needs the Stage-I generator")

    train, val = train_val_split(
        emotion_entries(manifest), cfg.embedding.val_fraction, cfg.training.seed
    )
    if not val:
        raise DatasetError("Stage II needs a validation split; the corpus is too small")
    cache = out_dir / "cache"
    train_set = ClipDataset(manifest, cfg, entries=train, cache_dir=cache)
    val_set = ClipDataset(manifest, cfg, entries=val, cache_dir=cache)
    if generator is not None:
        generator.eval()
        for p in generator.parameters():
            p.requires_grad_(False)

    torch.manual_seed(cfg.training.seed)
    rng = np.random.default_rng(cfg.training.seed)
    extractor.freeze_trunk()
    extractor.train()
    optimizer = torch.optim.AdamW(
        [p for p in extractor.parameters() if p.requires_grad],
        lr=cfg.training.learning_rate,
        betas=cfg.training.betas,
        weight_decay=cfg.training.weight_decay,
    )
    writer = StepLogWriter(out_dir / "stage2_validation.jsonl")
    steps = max_steps or cfg.embedding.stage2_steps
    curve: list[ValidationPoint] = []
    best_state, best_point = None, None
    checkpoint_dir = out_dir / "checkpoints" / "stage2"
    start = 0
    if resume:
        restored = load_loop_state(checkpoint_dir, cfg, extractor, optimizer, rng)
        if restored is not None:
            start, extra = restored
            curve = [ValidationPoint(**p) for p in extra["curve"]]
            best_state = extra["best_state"]
            best_point = select_best(curve, criterion) if curve else None
            writer.truncate_after(start)

    for step in range(start + 1, steps + 1):
        batch = train_set.sample_batch(rng, cfg.training.batch_size)
        loss = F.cross_entropy(extractor.logits(batch.mel), batch.emotion)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()

        if step % cfg.embedding.eval_every == 0 or step == steps:
            point = validate(extractor, val_set, step, generator)
            curve.append(point)
            writer.write(point.model_dump())
            if select_best(curve, criterion) is point:
                best_point, best_state = point, copy.deepcopy(extractor.state_dict())
            logger.info(
                f"[stage2] step {step} ce={point.val_ce:.4f} acc={point.val_accuracy:.3f}"
            )
            extra = {"curve": [p.model_dump() for p in curve], "best_state": best_state}
            save_loop_state(checkpoint_dir, cfg, step, extractor, optimizer, rng, extra)

    if best_state is not None:
        extractor.load_state_dict(best_state)
        logger.info(f"[stage2] best {criterion} at step {best_point.step}")
    extractor.freeze()
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(extractor.state_dict(), out_dir / "extractor.pt")
    return extractor
