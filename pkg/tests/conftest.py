from __future__ import annotations

import numpy as np
import pytest
import torch

from src.audio.manifest import load_manifest
from src.audio.toy import make_toy_corpus
from src.audio.types import Waveform
from src.config import Config, DataConfig, LoggingConfig, ModelsConfig, RunConfig


def tiny_config(tmp_path=None, **sections) -> Config:
    """Networks small enough to run a full training step on CPU in well under a second."""
    base = {
        "models": ModelsConfig(
            generator_channels=4,
            n_down=1,
            style_dim=8,
            latent_dim=4,
            style_hidden=16,
            disc_channels=4,
            f0_channels=8,
            ling_channels=8,
        ),
        "training": RunConfig(batch_size=2, segment_seconds=0.4, pretrain_steps=2),
        "data": DataConfig(toy_speakers=2, toy_clips_per_pair=2, toy_duration_s=1.0),
        "logging": LoggingConfig(level="WARNING"),
    }
    if tmp_path is not None:
        base["out_dir"] = str(tmp_path / "run")
    base.update(sections)
    return Config(**base)


@pytest.fixture
def cfg(tmp_path) -> Config:
    return tiny_config(tmp_path)


@pytest.fixture(scope="session")
def toy_manifest_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("toy")
    return make_toy_corpus(
        out, n_speakers=2, clips_per_pair=2, duration_s=1.0, seed=7, split_ratios=(0.5, 0.0, 0.5)
    )


@pytest.fixture
def toy_manifest(toy_manifest_path):
    return load_manifest(toy_manifest_path)


def harmonic_tone(
    f0: float = 150.0, seconds: float = 1.0, sample_rate: int = 24000, amplitude: float = 0.2
) -> Waveform:
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    samples = sum(amplitude / k * np.sin(2 * np.pi * k * f0 * t) for k in range(1, 6))
    return Waveform(samples=samples, sample_rate=sample_rate)


@pytest.fixture
def tone() -> Waveform:
    return harmonic_tone()


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


@pytest.fixture(scope="session")
def make_config():
    return tiny_config


@pytest.fixture(scope="session")
def make_tone():
    return harmonic_tone
