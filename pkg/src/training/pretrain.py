"""Supervised pre-training of the frozen pitch and linguistic stand-ins."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from ..audio.manifest import DatasetManifest
from ..config import Config
from ..errors import DatasetError
from ..logging_config import StepLogWriter
from ..models import F0Net, LingNet
from .checkpoint import load_loop_state, save_loop_state
from .data import NO_LABEL, ClipDataset

logger = logging.getLogger(__name__)

UNVOICED_WEIGHT = 0.1


def f0_regression_loss(
    predicted: torch.Tensor, target: torch.Tensor, voiced: torch.Tensor, scale: float
) -> torch.Tensor:
    """L1 to the oracle pitch on voiced frames plus a pull towards 0 Hz elsewhere."""
    voiced = voiced.bool()
    loss = predicted.sum() * 0.0
    if voiced.any():
        loss = loss + (predicted[voiced] - target[voiced]).abs().mean() / scale
    if (~voiced).any():
        loss = loss + UNVOICED_WEIGHT * predicted[~voiced].abs().mean() / scale
    return loss


def _optimizer(module: torch.nn.Module, cfg: Config) -> torch.optim.Optimizer:
    return torch.optim.AdamW(
        module.parameters(),
        lr=cfg.training.learning_rate,
        betas=cfg.training.betas,
        weight_decay=cfg.training.weight_decay,
    )


def _run(
    name: str,
    module: torch.nn.Module,
    dataset: ClipDataset,
    cfg: Config,
    loss_fn,
    out_dir: Path,
    steps: int | None,
    resume: bool = False,
) -> Path:
    rng = np.random.default_rng(cfg.training.seed)
    optimizer = _optimizer(module, cfg)
    writer = StepLogWriter(out_dir / f"{name}_steps.jsonl")
    steps = steps or cfg.training.pretrain_steps
    checkpoint_dir = out_dir / "checkpoints" / name
    start = 0
    if resume:
        restored = load_loop_state(checkpoint_dir, cfg, module, optimizer, rng)
        if restored is not None:
            start = restored[0]
            writer.truncate_after(start)
    module.train()
    for step in range(start + 1, steps + 1):
        batch = dataset.sample_batch(rng, cfg.training.batch_size)
        loss = loss_fn(module, batch)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        if step % cfg.training.log_every == 0:
            writer.write({"step": step, "loss": float(loss)})
        if step % 100 == 0:
            logger.info(f"[{name}] step {step}/{steps} loss={float(loss):.4f}")
        if step % cfg.training.checkpoint_every == 0 or step == steps:
            save_loop_state(checkpoint_dir, cfg, step, module, optimizer, rng)
    module.eval()
    path = out_dir / f"{name}.pt"
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(module.state_dict(), path)
    logger.info(f"Saved pre-trained {name} to {path}")
    return path


def pretrain_f0(
    cfg: Config,
    manifest: DatasetManifest,
    out_dir: str | Path,
    steps: int | None = None,
    resume: bool = False,
) -> Path:
    """Fit :class:`F0Net` to the oracle pitch track; returns the saved state path."""
    out_dir = Path(out_dir)
    dataset = ClipDataset(manifest, cfg, "train", cache_dir=out_dir / "cache")
    torch.manual_seed(cfg.training.seed)
    net = F0Net(cfg.audio.n_mels, cfg.models)
    scale = cfg.models.f0_scale

    def loss_fn(module: F0Net, batch) -> torch.Tensor:
        predicted, _ = module(batch.mel)
        return f0_regression_loss(predicted, batch.f0, batch.voiced, scale)

    return _run("f0_net", net, dataset, cfg, loss_fn, out_dir, steps, resume)


def pretrain_ling(
    cfg: Config,
    manifest: DatasetManifest,
    out_dir: str | Path,
    steps: int | None = None,
    resume: bool = False,
) -> Path:
    """Fit :class:`LingNet` to per-frame phone labels; entries without labels are skipped."""
    out_dir = Path(out_dir)
    labelled = [e for e in manifest.split("train") if e.labels_path]
    if not labelled:
        raise DatasetError("no training entry carries per-frame phone labels")
    dataset = ClipDataset(manifest, cfg, entries=labelled, cache_dir=out_dir / "cache")
    torch.manual_seed(cfg.training.seed)
    net = LingNet(cfg.audio.n_mels, cfg.models)

    def loss_fn(module: LingNet, batch) -> torch.Tensor:
        return F.cross_entropy(module.logits(batch.mel), batch.phones, ignore_index=NO_LABEL)

    return _run("ling_net", net, dataset, cfg, loss_fn, out_dir, steps, resume)
