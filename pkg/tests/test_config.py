"""Tests for configuration loading, overrides and validation."""

from __future__ import annotations

import pytest
import yaml
from pydantic import ValidationError

from src.config import (
    Config,
    ConfigManager,
    LossWeights,
    config_hash,
    deep_merge,
    load_config,
    snapshot_config,
)
from src.errors import ConfigError


def _write(tmp_path, data) -> str:
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def test_default_file_loads():
    cfg = load_config()

    assert cfg.audio.sample_rate == 24000
    assert cfg.audio.n_mels == 80
    assert cfg.audio.hop_length == 300
    assert cfg.descriptors.window_len == 8


def test_overrides_win_over_file(tmp_path):
    path = _write(tmp_path, {"training": {"seed": 1, "batch_size": 4}})

    cfg = load_config(path, {"training": {"seed": 99}})

    assert cfg.training.seed == 99
    assert cfg.training.batch_size == 4


def test_env_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("EMO_STARGAN_SEED", "42")
    monkeypatch.setenv("EMO_STARGAN_OUT_DIR", str(tmp_path / "elsewhere"))
    monkeypatch.setenv("DEBUG", "true")

    cfg = load_config(_write(tmp_path, {}))

    assert cfg.training.seed == 42
    assert cfg.out_dir == str(tmp_path / "elsewhere")
    assert cfg.logging.level == "DEBUG"


def test_malformed_yaml_is_a_config_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("training: [unclosed\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        ConfigManager(path).load_config()


def test_invalid_value_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="Invalid configuration"):
        load_config(_write(tmp_path, {"descriptors": {"window_len": 7}}))


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "nope.yaml"))


def test_segment_frames_must_be_whole():
    assert Config(training={"segment_seconds": 2.0}).segment_frames == 160

    with pytest.raises(ConfigError):
        _ = Config(training={"segment_seconds": 0.01}).segment_frames


def test_loss_weight_toggle():
    weights = LossWeights(disabled=["af"])

    assert weights.weight("af") == 0.0
    assert not weights.is_active("af")
    assert weights.weight("embed") == 2.0
    assert LossWeights().weight("emog") == pytest.approx(0.01)


def test_unknown_disabled_term_is_rejected(tmp_path):
    with pytest.raises(ValidationError, match=r"unknown loss terms \[.louder.\]"):
        LossWeights(disabled=["af", "louder"])

    with pytest.raises(ConfigError, match="unknown loss terms"):
        load_config(_write(tmp_path, {"losses": {"disabled": ["embedding"]}}))


def test_config_hash_tracks_model_shape_only():
    base = Config()

    assert config_hash(base) == config_hash(Config(training={"seed": 5}))
    assert config_hash(base) != config_hash(Config(models={"style_dim": 32}))


def test_snapshot_round_trips(tmp_path):
    cfg = Config(out_dir=str(tmp_path))

    path = snapshot_config(cfg, tmp_path)

    assert Config(**yaml.safe_load(path.read_text(encoding="utf-8"))) == cfg


def test_deep_merge_keeps_siblings():
    merged = deep_merge({"a": {"x": 1, "y": 2}, "b": 3}, {"a": {"y": 5}})

    assert merged == {"a": {"x": 1, "y": 5}, "b": 3}
