"""Handlers behind the ``emo-stargan`` subcommands.

Every handler takes the parsed arguments and the effective configuration and
returns a process exit code.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

import numpy as np
import torch

from .audio.io import load_waveform, resample, save_waveform
from .audio.manifest import DatasetManifest, load_manifest
from .audio.mel import MelFrontEnd
from .audio.toy import make_toy_corpus
from .config import Config
from .descriptors.kinds import ALL_KINDS
from .descriptors.pitch import oracle_f0, voicing_mask
from .descriptors.series import descriptor_series, feature_table, write_feature_table
from .embedding.extractor import build_extractor
from .embedding.stage1 import load_stage1, train_stage1
from .embedding.stage2 import train_stage2
from .errors import ConfigError, DatasetError
from .training.checkpoint import checkpoint_config, load_checkpoint
from .training.convert import convert, convert_split
from .training.presets import get_preset, select_best_descriptor
from .training.pretrain import pretrain_f0, pretrain_ling
from .training.trainer import train_vc

logger = logging.getLogger(__name__)


def resolve_manifest(args: argparse.Namespace, cfg: Config) -> DatasetManifest:
    """The manifest named on the command line or in the config, else a fresh toy corpus."""
    path = getattr(args, "manifest", None) or cfg.data.manifest_path
    if path is None:
        toy_dir = Path(cfg.out_dir) / "toy"
        if (toy_dir / "manifest.jsonl").exists():
            path = toy_dir / "manifest.jsonl"
        else:
            logger.info(f"No manifest given; synthesising a toy corpus in {toy_dir}")
            path = _make_toy(cfg, toy_dir)
    return load_manifest(path)


def _make_toy(cfg: Config, out_dir: Path) -> Path:
    return make_toy_corpus(
        out_dir,
        n_speakers=cfg.data.toy_speakers,
        clips_per_pair=cfg.data.toy_clips_per_pair,
        duration_s=cfg.data.toy_duration_s,
        seed=cfg.training.seed,
        split_ratios=cfg.data.split_ratios,
        sample_rate=cfg.audio.sample_rate,
        hop_length=cfg.audio.hop_length,
    )


def make_toy_data(args: argparse.Namespace, cfg: Config) -> int:
    path = _make_toy(cfg, Path(cfg.out_dir))
    print(path)
    return 0


def run_pretrain_f0(args: argparse.Namespace, cfg: Config) -> int:
    path = pretrain_f0(
        cfg, resolve_manifest(args, cfg), cfg.out_dir, args.max_steps, resume=args.resume
    )
    print(path)
    return 0


def run_pretrain_ling(args: argparse.Namespace, cfg: Config) -> int:
    path = pretrain_ling(
        cfg, resolve_manifest(args, cfg), cfg.out_dir, args.max_steps, resume=args.resume
    )
    print(path)
    return 0


def run_stage1(args: argparse.Namespace, cfg: Config) -> int:
    train_stage1(
        cfg, resolve_manifest(args, cfg), cfg.out_dir, args.max_steps, resume=args.resume
    )
    print(Path(cfg.out_dir) / "style_encoder.pt")
    return 0


def run_stage2(args: argparse.Namespace, cfg: Config) -> int:
    stage1_dir = args.stage1_dir or cfg.embedding.stage1_checkpoint
    if stage1_dir is None:
        raise ConfigError("train-emotion-stage2 needs --stage1-dir or embedding.stage1_checkpoint")
    encoder, generator = load_stage1(cfg, stage1_dir)
    train_stage2(
        build_extractor(encoder),
        cfg,
        resolve_manifest(args, cfg),
        cfg.out_dir,
        generator=generator,
        max_steps=args.max_steps,
        resume=args.resume,
    )
    print(Path(cfg.out_dir) / "extractor.pt")
    return 0


def run_train_vc(args: argparse.Namespace, cfg: Config) -> int:
    state = train_vc(
        cfg, resolve_manifest(args, cfg), cfg.out_dir, resume=args.resume, max_steps=args.max_steps
    )
    print(f"step={state.step} checkpoint={Path(cfg.out_dir) / 'checkpoints' / 'latest'}")
    return 0


def run_convert(args: argparse.Namespace, cfg: Config) -> int:
    run_cfg = checkpoint_config(args.checkpoint)
    state = load_checkpoint(args.checkpoint, run_cfg)
    if args.input is None:
        manifest = resolve_manifest(args, cfg)
        print(convert_split(state, manifest, run_cfg, cfg.out_dir, args.split, cfg.training.seed))
        return 0
    if args.target is None:
        raise ConfigError("convert --in needs --target")

    reference = load_waveform(args.reference) if args.reference else None
    _, waveform = convert(
        state, load_waveform(args.input), args.target, run_cfg, reference, cfg.training.seed
    )
    out = Path(args.output or Path(cfg.out_dir) / f"{Path(args.input).stem}_to{args.target}.wav")
    save_waveform(waveform, out)
    print(out)
    return 0


def extract_features(args: argparse.Namespace, cfg: Config) -> int:
    """Per-window descriptor values of the given WAVs (or a manifest split) as TSV."""
    front_end = MelFrontEnd(cfg.audio)
    if args.input:
        paths = [Path(p) for p in args.input]
    else:
        manifest = resolve_manifest(args, cfg)
        paths = [manifest.resolve(e) for e in manifest.split(args.split)]
    if not paths:
        raise DatasetError("no utterances to extract features from")

    kinds = [k.value for k in ALL_KINDS] if args.all_kinds else cfg.descriptors.active_kinds
    rows = []
    for path in paths:
        waveform = load_waveform(path)
        if waveform.sample_rate != cfg.audio.sample_rate:
            waveform = resample(waveform, cfg.audio.sample_rate)
        mel = front_end.log_mel(waveform)
        contour = oracle_f0(waveform, cfg.audio)
        mask = voicing_mask(contour, cfg.descriptors.conf_threshold)
        series = [
            descriptor_series(
                kind,
                mel,
                mask,
                f0=contour.f0_hz,
                window_len=cfg.descriptors.window_len,
                eps=cfg.descriptors.eps,
                floor=cfg.audio.floor,
            )
            for kind in kinds
        ]
        rows.extend(feature_table(path.stem, series))
    out = write_feature_table(rows, Path(cfg.out_dir) / "features.tsv")
    logger.info(f"{len(rows)} descriptor values from {len(paths)} utterances")
    print(out)
    return 0


def evaluate(args: argparse.Namespace, cfg: Config) -> int:
    from evaluations.corpus_evaluator import render_markdown, run_evaluation

    report = run_evaluation(
        cfg,
        args.pairs,
        args.report or Path(cfg.out_dir) / "report",
        extractor_path=args.extractor or cfg.training.extractor_checkpoint,
        ling_net_path=args.ling_net or cfg.training.ling_checkpoint,
        svm_manifest=args.svm_manifest,
    )
    print(render_markdown(report))
    return 0


def compare(args: argparse.Namespace, cfg: Config) -> int:
    from evaluations.comparator import compare_reports
    from evaluations.corpus_evaluator import load_report

    markdown = compare_reports(load_report(args.baseline), load_report(args.candidate))
    out = Path(cfg.out_dir) / "comparison.md"
    out.write_text(markdown, encoding="utf-8")
    print(markdown)
    return 0


def select_descriptor(args: argparse.Namespace, cfg: Config) -> int:
    """Pick the single descriptor whose ``af_<kind>`` run best preserves emotion."""
    from evaluations.corpus_evaluator import load_report

    results = {}
    for kind in ALL_KINDS:
        path = Path(args.reports) / f"af_{kind.value}"
        if not (path / "report.json").exists():
            logger.warning(f"No report for {kind.value} under {path}")
            continue
        row = load_report(path).groups.get("all")
        columns = row.columns if row is not None else {}
        acc, pcc = columns.get("acc_orig"), columns.get("pcc")
        if acc is None:
            logger.warning(f"Report {path} has no acc_orig column; skipped")
            continue
        results[kind.value] = {
            "acc_orig": acc.mean,
            "pcc": pcc.mean if pcc is not None else float("-inf"),
        }
    if not results:
        raise DatasetError(f"no af_<kind> reports with acc_orig under {args.reports}")
    best = select_best_descriptor(results)
    for kind, values in sorted(results.items()):
        logger.info(f"{kind}: acc_orig={values['acc_orig']:.4f} pcc={values['pcc']:.4f}")
    print(best.value)
    return 0


def apply_preset(cfg: Config, name: str | None) -> Config:
    if not name:
        return cfg
    try:
        return get_preset(name).apply(cfg)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def seed_everything(seed: int) -> None:
    np.random.seed(seed)
    torch.manual_seed(seed)


HANDLERS = {
    "make-toy-data": make_toy_data,
    "pretrain-f0": run_pretrain_f0,
    "pretrain-ling": run_pretrain_ling,
    "train-emotion-stage1": run_stage1,
    "train-emotion-stage2": run_stage2,
    "train-vc": run_train_vc,
    "convert": run_convert,
    "extract-features": extract_features,
    "evaluate": evaluate,
    "compare": compare,
    "select-descriptor": select_descriptor,
}
