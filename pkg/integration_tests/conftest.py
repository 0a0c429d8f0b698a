from __future__ import annotations

from pathlib import Path

import pytest

from src.audio.manifest import load_manifest
from src.audio.toy import make_toy_corpus
from src.config import Config, load_config
from src.embedding.extractor import build_extractor
from src.embedding.stage1 import load_stage1, train_stage1
from src.embedding.stage2 import train_stage2
from src.training.pretrain import pretrain_f0, pretrain_ling

SMOKE_CONFIG = Path(__file__).parent.parent / "configs" / "tests" / "config-smoke.yaml"


def smoke_config(out_dir: Path, **training) -> Config:
    overrides = {"out_dir": str(out_dir)}
    if training:
        overrides["training"] = training
    return load_config(str(SMOKE_CONFIG), overrides)


@pytest.fixture(scope="session")
def smoke_manifest(tmp_path_factory):
    cfg = smoke_config(tmp_path_factory.mktemp("unused"))
    path = make_toy_corpus(
        tmp_path_factory.mktemp("toy"),
        n_speakers=cfg.data.toy_speakers,
        clips_per_pair=cfg.data.toy_clips_per_pair,
        duration_s=cfg.data.toy_duration_s,
        seed=cfg.training.seed,
        split_ratios=cfg.data.split_ratios,
    )
    return load_manifest(path)


@pytest.fixture(scope="session")
def pretrained(tmp_path_factory, smoke_manifest):
    """Pitch and linguistic networks plus a Stage I/II extractor, trained for a few steps."""
    root = tmp_path_factory.mktemp("pretrained")
    cfg = smoke_config(root)
    f0 = pretrain_f0(cfg, smoke_manifest, root / "f0")
    ling = pretrain_ling(cfg, smoke_manifest, root / "ling")
    train_stage1(cfg, smoke_manifest, root / "stage1")
    encoder, generator = load_stage1(cfg, root / "stage1")
    train_stage2(build_extractor(encoder), cfg, smoke_manifest, root / "stage2", generator)
    return {
        "f0_checkpoint": str(f0),
        "ling_checkpoint": str(ling),
        "extractor_checkpoint": str(root / "stage2" / "extractor.pt"),
    }


TOY_CONFIG = Path(__file__).parent.parent / "configs" / "config-toy.yaml"


def toy_config(out_dir: Path, **training) -> Config:
    overrides = {"out_dir": str(out_dir), "logging": {"level": "WARNING"}}
    if training:
        overrides["training"] = training
    return load_config(str(TOY_CONFIG), overrides)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """The laptop-scale corpus of ``config-toy.yaml``."""
    cfg = toy_config(tmp_path_factory.mktemp("unused"))
    path = make_toy_corpus(
        tmp_path_factory.mktemp("toy_full"),
        n_speakers=cfg.data.toy_speakers,
        clips_per_pair=cfg.data.toy_clips_per_pair,
        duration_s=cfg.data.toy_duration_s,
        seed=cfg.training.seed,
        split_ratios=cfg.data.split_ratios,
    )
    return load_manifest(path)
