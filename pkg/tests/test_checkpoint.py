"""Checkpoint round trips, config-hash refusal and blob checksums."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from src.errors import CheckpointError
from src.models import F0Net, build_bundle
from src.training.checkpoint import (
    TrainState,
    load_checkpoint,
    load_component,
    read_meta,
    save_checkpoint,
)
from src.training.trainer import make_optimizers


def _state(cfg) -> TrainState:
    bundle = build_bundle(cfg, n_domains=2)
    state = TrainState(
        bundle=bundle,
        optimizers=make_optimizers(bundle, cfg),
        step=5,
        epoch=1,
        numpy_rng=np.random.default_rng(3),
        torch_rng=torch.Generator().manual_seed(3),
    )
    # one optimizer step so the saved moments are not empty
    for optimizer in state.optimizers.values():
        params = [p for group in optimizer.param_groups for p in group["params"]]
        sum(p.sum() for p in params).backward()
        optimizer.step()
    return state


def test_round_trip_restores_weights_optimizers_and_rng(cfg, tmp_path):
    state = _state(cfg)
    directory = save_checkpoint(state, tmp_path / "ckpt", cfg)
    expected_draw = state.numpy_rng.random()
    expected_noise = torch.rand(3, generator=state.torch_rng)

    restored = load_checkpoint(directory, cfg, lambda bundle: make_optimizers(bundle, cfg))

    assert restored.step == 5 and restored.epoch == 1
    restored_modules = restored.bundle.components()
    for name, module in state.bundle.components().items():
        torch.testing.assert_close(module.state_dict(), restored_modules[name].state_dict())
    assert restored.numpy_rng.random() == expected_draw
    torch.testing.assert_close(torch.rand(3, generator=restored.torch_rng), expected_noise)
    saved = state.optimizers["generator"].state_dict()["state"]
    loaded = restored.optimizers["generator"].state_dict()["state"]
    torch.testing.assert_close(saved[0]["exp_avg"], loaded[0]["exp_avg"])


def test_meta_lists_checksummed_blobs(cfg, tmp_path):
    directory = save_checkpoint(_state(cfg), tmp_path / "ckpt", cfg)

    meta = read_meta(directory)

    assert meta["step"] == 5
    assert "generator.pt" in meta["blobs"] and "rng.pt" in meta["blobs"]
    assert all(len(digest) == 64 for digest in meta["blobs"].values())
    assert (directory / "config.yaml").exists()


def test_changed_model_config_is_refused(cfg, tmp_path, make_config):
    directory = save_checkpoint(_state(cfg), tmp_path / "ckpt", cfg)
    other = make_config(
        tmp_path, models=cfg.models.model_copy(update={"style_dim": cfg.models.style_dim * 2})
    )

    with pytest.raises(CheckpointError, match="does not match"):
        load_checkpoint(directory, other)


def test_training_only_changes_keep_the_hash(cfg, tmp_path):
    directory = save_checkpoint(_state(cfg), tmp_path / "ckpt", cfg)
    longer = cfg.model_copy(
        update={"training": cfg.training.model_copy(update={"learning_rate": 1e-3})}
    )

    assert load_checkpoint(directory, longer).step == 5


def test_corrupted_blob_is_detected(cfg, tmp_path):
    directory = save_checkpoint(_state(cfg), tmp_path / "ckpt", cfg)
    with open(directory / "generator.pt", "ab") as f:
        f.write(b"\0")

    with pytest.raises(CheckpointError, match="corrupted"):
        load_checkpoint(directory, cfg)


def test_missing_meta(tmp_path):
    with pytest.raises(CheckpointError, match="metadata"):
        read_meta(tmp_path)


def test_load_component_from_file_and_directory(cfg, tmp_path):
    state = _state(cfg)
    directory = save_checkpoint(state, tmp_path / "ckpt", cfg)
    torch.save(state.bundle.f0_net.state_dict(), tmp_path / "f0_net.pt")

    for source in (tmp_path / "f0_net.pt", directory):
        net = load_component(source, F0Net(cfg.audio.n_mels, cfg.models))
        for p, q in zip(net.parameters(), state.bundle.f0_net.parameters()):
            torch.testing.assert_close(p, q)

    with pytest.raises(CheckpointError):
        load_component(tmp_path / "absent.pt", F0Net(cfg.audio.n_mels, cfg.models))
