"""Whole pipeline at toy scale: train, convert, evaluate, compare."""

from __future__ import annotations

import json

import pytest

from evaluations.comparator import compare_reports
from evaluations.corpus_evaluator import load_report, run_evaluation
from src.main import main
from src.training.checkpoint import load_checkpoint
from src.training.convert import convert_split
from src.training.presets import get_preset
from src.training.trainer import STEP_LOG, train_vc

from .conftest import smoke_config

pytestmark = [pytest.mark.integration, pytest.mark.slow]

STEPS = 4


def _train_and_evaluate(root, manifest, pretrained, preset):
    cfg = get_preset(preset).apply(smoke_config(root, **pretrained))
    train_vc(cfg, manifest, root, max_steps=STEPS)
    state = load_checkpoint(root / "checkpoints" / "latest", cfg)
    pairs = convert_split(state, manifest, cfg, root / "converted", "test", cfg.training.seed)
    return run_evaluation(
        cfg,
        pairs,
        root / "report",
        extractor_path=pretrained["extractor_checkpoint"],
        ling_net_path=pretrained["ling_checkpoint"],
    )


def test_emotion_preserving_run_end_to_end(tmp_path, smoke_manifest, pretrained):
    report = _train_and_evaluate(tmp_path, smoke_manifest, pretrained, "emo_stargan")

    with open(tmp_path / STEP_LOG, encoding="utf-8") as f:
        records = [json.loads(line) for line in f]
    assert [r["step"] for r in records] == list(range(1, STEPS + 1))
    assert all({"af", "embed", "emog"} <= set(r["G"]) for r in records)
    assert len(report.pairs) == len(smoke_manifest.split("test"))
    assert report.groups["all"].columns["embedding_mae"] is not None
    assert report.groups["all"].columns["cer"] is not None
    assert report.eer is not None and 0.0 <= report.eer <= 1.0
    assert (tmp_path / "report" / "summary.tsv").exists()


def test_ablation_against_the_baseline(tmp_path, smoke_manifest, pretrained):
    _train_and_evaluate(tmp_path / "baseline", smoke_manifest, pretrained, "baseline")
    _train_and_evaluate(tmp_path / "emo", smoke_manifest, pretrained, "emo_stargan")

    markdown = compare_reports(
        load_report(tmp_path / "baseline" / "report"), load_report(tmp_path / "emo" / "report")
    )

    assert "| Metric | Baseline | Candidate | Delta | Better |" in markdown
    assert "## Paired t-tests" in markdown
    with open(tmp_path / "baseline" / STEP_LOG, encoding="utf-8") as f:
        baseline_terms = set(json.loads(f.readline())["G"])
    assert not {"af", "embed", "emog"} & baseline_terms


def test_cli_toy_data_and_feature_dump(tmp_path, capsys):
    config = "configs/tests/config-smoke.yaml"
    out = tmp_path / "toy"

    assert main(["make-toy-data", "--config", config, "--out-dir", str(out)]) == 0
    manifest = capsys.readouterr().out.strip()
    code = main(
        ["extract-features", "--config", config, "--manifest", manifest, "--out-dir", str(out)]
    )

    assert code == 0
    assert (out / "features.tsv").stat().st_size > 0
