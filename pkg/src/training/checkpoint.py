"""Checkpoint layout: one blob per component plus optimizer and RNG state, all checksummed."""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch
import yaml

from ..config import Config, config_hash, snapshot_config
from ..embedding.extractor import EmbeddingExtractor
from ..errors import CheckpointError
from ..models import ModelBundle, StyleEncoder, build_bundle

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
META_FILE = "meta.json"
RNG_FILE = "rng.pt"


@dataclass
class TrainState:
    """Everything needed to continue a run bit-for-bit."""

    bundle: ModelBundle
    optimizers: dict[str, torch.optim.Optimizer] = field(default_factory=dict)
    step: int = 0
    epoch: int = 0
    numpy_rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    torch_rng: torch.Generator = field(default_factory=torch.Generator)
    use_f0: bool = True

    def rng_state(self) -> dict[str, Any]:
        return {
            "numpy": self.numpy_rng.bit_generator.state,
            "torch": self.torch_rng.get_state(),
            "torch_global": torch.get_rng_state(),
        }

    def restore_rng(self, state: dict[str, Any]) -> None:
        self.numpy_rng.bit_generator.state = state["numpy"]
        self.torch_rng.set_state(state["torch"])
        torch.set_rng_state(state["torch_global"])


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _save_blob(obj: Any, directory: Path, name: str, blobs: dict[str, str]) -> None:
    path = directory / name
    torch.save(obj, path)
    blobs[name] = _sha256(path)


def save_checkpoint(state: TrainState, directory: str | Path, cfg: Config) -> Path:
    """Write ``state`` into ``directory`` (created if needed) and return it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blobs: dict[str, str] = {}
    for name, module in state.bundle.components().items():
        _save_blob(module.state_dict(), directory, f"{name}.pt", blobs)
    for name, optimizer in state.optimizers.items():
        _save_blob(optimizer.state_dict(), directory, f"optim_{name}.pt", blobs)
    _save_blob(state.rng_state(), directory, RNG_FILE, blobs)
    snapshot_config(cfg, directory)

    meta = {
        "format_version": FORMAT_VERSION,
        "config_hash": state.bundle.config_hash,
        "step": state.step,
        "epoch": state.epoch,
        "n_domains": state.bundle.n_domains,
        "use_f0": state.use_f0,
        "has_extractor": state.bundle.extractor is not None,
        "blobs": blobs,
    }
    with open(directory / META_FILE, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    logger.info(f"Saved checkpoint at step {state.step} to {directory}")
    return directory


def read_meta(directory: str | Path) -> dict[str, Any]:
    path = Path(directory) / META_FILE
    if not path.exists():
        raise CheckpointError(f"no checkpoint metadata at {path}")
    with open(path, encoding="utf-8") as f:
        meta = json.load(f)
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint format {meta.get('format_version')} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    return meta


def checkpoint_config(directory: str | Path) -> Config:
    with open(Path(directory) / "config.yaml", encoding="utf-8") as f:
        return Config(**yaml.safe_load(f))


def _load_blob(directory: Path, name: str, meta: dict[str, Any]) -> Any:
    path = directory / name
    expected = meta["blobs"].get(name)
    if expected is None or not path.exists():
        raise CheckpointError(f"checkpoint blob {name} is missing")
    if _sha256(path) != expected:
        raise CheckpointError(f"checkpoint blob {name} is corrupted (checksum mismatch)")
    return torch.load(path, map_location="cpu", weights_only=False)


def load_checkpoint(
    directory: str | Path,
    cfg: Config | None = None,
    optimizer_factory: Callable[[ModelBundle], dict[str, torch.optim.Optimizer]] | None = None,
) -> TrainState:
    """Rebuild a :class:`TrainState`; refuses a config whose model hash differs.

    ``optimizer_factory`` builds optimizers over the restored bundle, whose
    saved moments are then loaded into them.
    """
    directory = Path(directory)
    meta = read_meta(directory)
    cfg = cfg or checkpoint_config(directory)
    if config_hash(cfg) != meta["config_hash"]:
        raise CheckpointError(
            f"config hash {config_hash(cfg)[:12]} does not match checkpoint "
            f"{meta['config_hash'][:12]}"
        )

    bundle = build_bundle(cfg, meta["n_domains"], use_f0=meta["use_f0"])
    if meta.get("has_extractor"):
        encoder = StyleEncoder(cfg.models.n_emotions, cfg.models)
        bundle.extractor = EmbeddingExtractor(encoder)
    for name, module in bundle.components().items():
        module.load_state_dict(_load_blob(directory, f"{name}.pt", meta))
    if bundle.extractor is not None:
        bundle.extractor.freeze()
    bundle.step = meta["step"]

    state = TrainState(bundle=bundle, step=meta["step"], epoch=meta["epoch"], use_f0=meta["use_f0"])
    optimizers = optimizer_factory(bundle) if optimizer_factory else {}
    for name, optimizer in optimizers.items():
        optimizer.load_state_dict(_load_blob(directory, f"optim_{name}.pt", meta))
        state.optimizers[name] = optimizer
    state.restore_rng(_load_blob(directory, RNG_FILE, meta))
    logger.info(f"Loaded checkpoint at step {state.step} from {directory}")
    return state


def load_component(path: str | Path, module: torch.nn.Module) -> torch.nn.Module:
    """Load a single component either from a ``.pt`` file or from a checkpoint directory."""
    path = Path(path)
    if path.is_dir():
        meta = read_meta(path)
        name = next((n for n in meta["blobs"] if n == f"{_component_tag(module)}.pt"), None)
        if name is None:
            raise CheckpointError(f"{path} holds no {_component_tag(module)} component")
        state = _load_blob(path, name, meta)
    elif path.exists():
        state = torch.load(path, map_location="cpu", weights_only=False)
    else:
        raise CheckpointError(f"component checkpoint {path} does not exist")
    module.load_state_dict(state)
    return module


def _component_tag(module: torch.nn.Module) -> str:
    return {
        "F0Net": "f0_net",
        "LingNet": "ling_net",
        "EmbeddingExtractor": "extractor",
        "StyleEncoder": "style_encoder",
    }.get(type(module).__name__, type(module).__name__.lower())


LOOP_FILE = "loop.pt"


def save_loop_state(
    directory: str | Path,
    cfg: Config,
    step: int,
    module: torch.nn.Module,
    optimizer: torch.optim.Optimizer,
    rng: np.random.Generator,
    extra: dict[str, Any] | None = None,
) -> Path:
    """Checkpoint a single-network loop (pre-training, Stage II) for ``--resume``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blobs: dict[str, str] = {}
    payload = {
        "step": step,
        "module": module.state_dict(),
        "optimizer": optimizer.state_dict(),
        "numpy": rng.bit_generator.state,
        "torch_global": torch.get_rng_state(),
        "extra": extra or {},
    }
    _save_blob(payload, directory, LOOP_FILE, blobs)
    meta = {
        "format_version": FORMAT_VERSION,
        "config_hash": config_hash(cfg),
        "step": step,
        "blobs": blobs,
    }
    with open(directory / META_FILE, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    return directory


def load_loop_state(
    directory: str | Path,
    cfg: Config,
    module: torch.nn.Module,
    optimizer: torch.optim.Optimizer,
    rng: np.random.Generator,
) -> tuple[int, dict[str, Any]] | None:
    """Restore a loop saved by :func:`save_loop_state`; ``None`` when there is none yet.

    Returns the completed step count and the loop's extra payload.
    """
    directory = Path(directory)
    if not (directory / META_FILE).exists():
        return None
    meta = read_meta(directory)
    if config_hash(cfg) != meta["config_hash"]:
        raise CheckpointError(
            f"config hash {config_hash(cfg)[:12]} does not match checkpoint "
            f"{meta['config_hash'][:12]}"
        )
    payload = _load_blob(directory, LOOP_FILE, meta)
    module.load_state_dict(payload["module"])
    optimizer.load_state_dict(payload["optimizer"])
    rng.bit_generator.state = payload["numpy"]
    torch.set_rng_state(payload["torch_global"])
    logger.info(f"Resuming {directory.name} from step {payload['step']}")
    return payload["step"], payload["extra"]
