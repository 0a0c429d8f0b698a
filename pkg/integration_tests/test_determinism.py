"""Same seed, same run; an interrupted run resumes onto the same trajectory."""

from __future__ import annotations

import json

import pytest

from src.training.trainer import STEP_LOG, train_vc

from .conftest import smoke_config

pytestmark = [pytest.mark.integration, pytest.mark.slow]


def _records(run_dir):
    with open(run_dir / STEP_LOG, encoding="utf-8") as f:
        return [json.loads(line) for line in f]


def test_same_seed_same_losses(tmp_path, smoke_manifest, pretrained):
    for name in ("a", "b"):
        train_vc(smoke_config(tmp_path / name, **pretrained), smoke_manifest, max_steps=3)

    assert _records(tmp_path / "a") == _records(tmp_path / "b")


def test_different_seed_changes_the_run(tmp_path, smoke_manifest, pretrained):
    train_vc(smoke_config(tmp_path / "a", **pretrained), smoke_manifest, max_steps=2)
    train_vc(smoke_config(tmp_path / "b", seed=123, **pretrained), smoke_manifest, max_steps=2)

    assert _records(tmp_path / "a") != _records(tmp_path / "b")


def test_resume_matches_the_uninterrupted_run(tmp_path, smoke_manifest, pretrained):
    straight = smoke_config(tmp_path / "straight", **pretrained)
    train_vc(straight, smoke_manifest, max_steps=4)

    resumed = smoke_config(tmp_path / "resumed", **pretrained)
    train_vc(resumed, smoke_manifest, max_steps=2)
    state = train_vc(resumed, smoke_manifest, resume=True, max_steps=4)

    assert state.step == 4
    expected, actual = _records(tmp_path / "straight"), _records(tmp_path / "resumed")
    assert [r["step"] for r in actual] == [1, 2, 3, 4]
    for want, got in zip(expected, actual, strict=True):
        assert got["L_G"] == pytest.approx(want["L_G"], rel=1e-5)
        assert got["L_D"] == pytest.approx(want["L_D"], rel=1e-5)
