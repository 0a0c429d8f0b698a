"""Laptop-scale training targets on the toy corpus.

These runs train real networks for a few hundred steps each and take minutes.
"""

from __future__ import annotations

import numpy as np
import pytest
import torch
import torch.nn.functional as F

from evaluations.corpus_evaluator import run_evaluation
from src.audio.mel import MelFrontEnd
from src.audio.toy import ToySpec, synthesize_toy_utterance, toy_speakers
from src.config import EMOTIONS
from src.descriptors import kernels
from src.embedding.extractor import build_extractor
from src.embedding.stage1 import load_stage1, train_stage1
from src.embedding.stage2 import ValidationPoint, select_best, train_stage2
from src.logging_config import StepLogWriter
from src.models import DomainClassifier, F0Net, LingNet
from src.training.checkpoint import load_checkpoint
from src.training.convert import convert_split
from src.training.data import NO_LABEL, ClipDataset
from src.training.presets import get_preset
from src.training.pretrain import pretrain_f0, pretrain_ling
from src.training.trainer import train_vc

from .conftest import toy_config

pytestmark = [pytest.mark.integration, pytest.mark.slow]

ABLATION_SEEDS = (0, 1, 2, 3, 4)
VC_STEPS = 200


@pytest.fixture(scope="module")
def pretrained(tmp_path_factory, toy_corpus):
    root = tmp_path_factory.mktemp("toy_pretrained")
    cfg = toy_config(root)
    paths = {
        "f0_checkpoint": str(pretrain_f0(cfg, toy_corpus, root / "pretrain")),
        "ling_checkpoint": str(pretrain_ling(cfg, toy_corpus, root / "pretrain")),
    }
    train_stage1(cfg, toy_corpus, root / "stage1")
    encoder, generator = load_stage1(cfg, root / "stage1")
    train_stage2(build_extractor(encoder), cfg, toy_corpus, root / "stage2", generator)
    paths["extractor_checkpoint"] = str(root / "stage2" / "extractor.pt")
    paths["stage2_dir"] = root / "stage2"
    return cfg, paths


def test_loudness_alone_separates_anger_from_sadness():
    front_end = MelFrontEnd()
    speakers = toy_speakers(4)

    def mean_loudness(emotion: str, seed: int) -> float:
        spec = ToySpec.from_archetypes(speakers[seed % 4], emotion, duration_s=1.0)
        mel = front_end.log_mel(synthesize_toy_utterance(spec, seed=seed).waveform)
        windows = kernels.mel_windows(torch.from_numpy(mel.values), 8)
        return float(kernels.loudness(windows, front_end.center_freqs).mean())

    loud = np.array([mean_loudness("anger", seed) for seed in range(200)])
    quiet = np.array([mean_loudness("sad", seed) for seed in range(200)])

    thresholds = np.sort(np.concatenate([loud, quiet]))
    accuracy = max(((loud > t).sum() + (quiet <= t).sum()) / 400 for t in thresholds)
    assert accuracy >= 0.95


def test_pitch_network_tracks_the_reference_pitch(pretrained, toy_corpus):
    cfg, paths = pretrained
    net = F0Net(cfg.audio.n_mels, cfg.models)
    net.load_state_dict(torch.load(paths["f0_checkpoint"], map_location="cpu"))
    net.eval()

    errors = []
    with torch.no_grad():
        for clip in ClipDataset(toy_corpus, cfg, "test").clips:
            predicted = net(torch.from_numpy(clip.mel.astype(np.float32)))[0][0].numpy()
            errors.append(np.abs(predicted - clip.f0)[clip.voiced])

    assert np.median(np.concatenate(errors)) < 10.0


def test_linguistic_network_labels_held_out_frames(pretrained, toy_corpus):
    cfg, paths = pretrained
    net = LingNet(cfg.audio.n_mels, cfg.models)
    net.load_state_dict(torch.load(paths["ling_checkpoint"], map_location="cpu"))
    net.eval()

    hits = total = 0
    with torch.no_grad():
        for clip in ClipDataset(toy_corpus, cfg, "test").clips:
            mel = torch.from_numpy(clip.mel.astype(np.float32)).unsqueeze(0)
            predicted = net.logits(mel).argmax(dim=1)[0].numpy()[: len(clip.phones)]
            labelled = clip.phones != NO_LABEL
            hits += int((predicted[labelled] == clip.phones[labelled]).sum())
            total += int(labelled.sum())

    assert hits / total >= 0.8


def test_emotion_classifier_fits_the_training_corpus(tmp_path, toy_corpus):
    cfg = toy_config(tmp_path)
    dataset = ClipDataset(toy_corpus, cfg, "train", cache_dir=tmp_path / "cache")
    torch.manual_seed(cfg.training.seed)
    classifier = DomainClassifier(len(EMOTIONS), cfg.models)
    optimizer = torch.optim.AdamW(classifier.parameters(), lr=cfg.training.learning_rate)
    rng = np.random.default_rng(cfg.training.seed)

    for _ in range(cfg.training.pretrain_steps):
        batch = dataset.sample_batch(rng, cfg.training.batch_size)
        loss = F.cross_entropy(classifier(batch.mel), batch.emotion)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()

    classifier.eval()
    hits = 0
    with torch.no_grad():
        for batch in dataset.iter_batches(cfg.training.batch_size):
            hits += int((classifier(batch.mel).argmax(dim=-1) == batch.emotion).sum())
    assert hits / len(dataset) >= 0.9


def test_stage2_classifier_head_generalises(pretrained):
    cfg, paths = pretrained
    records = StepLogWriter(paths["stage2_dir"] / "stage2_validation.jsonl").read()

    best = select_best(
        [ValidationPoint(**r) for r in records], cfg.embedding.selection_criterion
    )

    assert best.val_accuracy >= 0.85


def _ablation_run(root, corpus, paths, preset, seed):
    cfg = get_preset(preset).apply(
        toy_config(
            root,
            seed=seed,
            f0_checkpoint=paths["f0_checkpoint"],
            ling_checkpoint=paths["ling_checkpoint"],
            extractor_checkpoint=paths["extractor_checkpoint"],
        )
    )
    train_vc(cfg, corpus, root, max_steps=VC_STEPS)
    state = load_checkpoint(root / "checkpoints" / "latest", cfg)
    pairs = convert_split(state, corpus, cfg, root / "converted", "test", seed)
    report = run_evaluation(
        cfg,
        pairs,
        root / "report",
        extractor_path=paths["extractor_checkpoint"],
        ling_net_path=paths["ling_checkpoint"],
    )
    columns = report.groups["all"].columns
    return columns["pcc"].mean, columns["embedding_mae"].mean


def test_emotion_terms_beat_the_baseline_on_most_seeds(tmp_path, toy_corpus, pretrained):
    _, paths = pretrained
    pcc_wins = mae_wins = 0
    for seed in ABLATION_SEEDS:
        base_pcc, base_mae = _ablation_run(
            tmp_path / f"baseline_{seed}", toy_corpus, paths, "baseline", seed
        )
        emo_pcc, emo_mae = _ablation_run(
            tmp_path / f"emo_{seed}", toy_corpus, paths, "emo_stargan", seed
        )
        pcc_wins += emo_pcc > base_pcc
        mae_wins += emo_mae < base_mae

    assert pcc_wins >= 4
    assert mae_wins >= 4
