"""
Corpus Evaluator - objective metric battery over (source, converted) pairs

Computes per-pair emotion-preservation (SVM accuracies, embedding MAE, PCC),
intelligibility (CER) and anonymisation (EER) measures, aggregates them per
group and writes machine-readable records plus a summary table.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import torch
from pydantic import ValidationError

from src.audio.io import load_waveform, resample
from src.audio.manifest import load_manifest
from src.audio.mel import MelFrontEnd
from src.audio.types import Waveform
from src.config import Config, get_config
from src.descriptors.pitch import oracle_f0
from src.embedding.extractor import EmbeddingExtractor
from src.errors import EmoStarGANError, ManifestError
from src.logging_config import setup_run_logging
from src.models import LingNet, StyleEncoder
from src.training.checkpoint import load_component

from .emotion_svm import EmotionSVM, utterance_features
from .interfaces import LingNetTranscriber, Transcriber, Verifier, VoiceprintVerifier
from .metrics import (
    character_error_rate,
    column_stats,
    contour_correlation,
    embedding_mae,
    equal_error_rate,
)
from .schemas import (
    PAIR_COLUMNS,
    TABLE_COLUMNS,
    ColumnStats,
    ConversionPair,
    GroupRow,
    MetricReport,
    PairMetrics,
)

logger = logging.getLogger(__name__)


def load_pairs(path: str | Path) -> list[ConversionPair]:
    """Read a pairs JSONL file; relative audio paths resolve against its directory."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Pairs file not found: {path}")
    pairs = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                pair = ConversionPair(**json.loads(line))
            except json.JSONDecodeError as e:
                raise ManifestError(f"malformed pair record: {e}", line_number) from e
            except (ValidationError, ValueError) as e:
                raise ManifestError(f"invalid pair record: {e}", line_number) from e
            for field in ("source_path", "converted_path"):
                value = Path(getattr(pair, field))
                if not value.is_absolute():
                    setattr(pair, field, str(path.parent / value))
                if not Path(getattr(pair, field)).exists():
                    raise ManifestError(f"missing audio file {getattr(pair, field)}", line_number)
            pairs.append(pair)
    if not pairs:
        raise ManifestError(f"{path} holds no pairs")
    return pairs


class CorpusEvaluator:
    """
    Evaluates a pairs corpus with optional metric back-ends.

    A metric whose back-end is missing (no SVM, extractor or transcriber) is
    left out of the per-pair records and its column reported absent.

    CER compares the recognition of the converted clip with the recognition
    of its source (``evaluation.cer_reference = "source"``), so an identity
    pair scores 0 whatever the recogniser's own error. With ``"transcript"``
    the manifest transcript is the reference when the pair carries one.
    """

    def __init__(
        self,
        cfg: Config,
        svm: EmotionSVM | None = None,
        extractor: EmbeddingExtractor | None = None,
        transcriber: Transcriber | None = None,
        verifier: Verifier | None = None,
    ):
        self.cfg = cfg
        self.svm = svm
        self.extractor = extractor.eval() if extractor is not None else None
        self.transcriber = transcriber
        self.verifier = verifier
        self.front_end = MelFrontEnd(cfg.audio)

    def _load(self, path: str) -> Waveform:
        waveform = load_waveform(path)
        if waveform.sample_rate != self.cfg.audio.sample_rate:
            waveform = resample(waveform, self.cfg.audio.sample_rate)
        return waveform

    @torch.no_grad()
    def _embedding(self, waveform: Waveform) -> np.ndarray:
        mel = self.front_end.log_mel(waveform).values.astype(np.float32)
        return self.extractor(torch.from_numpy(mel).unsqueeze(0))[0].numpy()

    def evaluate_pair(self, pair: ConversionPair, source: Waveform, converted: Waveform):
        record = PairMetrics(pair_id=pair.pair_id, groups=pair.groups())

        src_f0 = oracle_f0(source, self.cfg.audio)
        conv_f0 = oracle_f0(converted, self.cfg.audio)
        pcc = contour_correlation(
            src_f0.f0_hz, conv_f0.f0_hz, self.cfg.evaluation.min_voiced_frames
        )
        record.pcc = pcc.value
        record.pcc_flagged = pcc.flagged
        record.joint_voiced_frames = pcc.joint_voiced
        if pcc.flagged:
            logger.warning(
                f"Pair {pair.pair_id}: {pcc.joint_voiced} jointly voiced frames, PCC excluded"
            )

        if self.extractor is not None:
            record.embedding_mae = embedding_mae(
                self._embedding(source), self._embedding(converted)
            )

        if self.svm is not None:
            src_features = utterance_features(source, self.cfg, src_f0)
            conv_features = utterance_features(converted, self.cfg, conv_f0)
            record.svm_source = self.svm.predict(src_features)[0]
            record.svm_converted = self.svm.predict(conv_features)[0]
            record.acc_svm = float(record.svm_converted == record.svm_source)
            if pair.emotion_label is not None:
                if pair.emotion_label not in self.svm.classes:
                    raise ValueError(
                        f"Pair {pair.pair_id}: emotion '{pair.emotion_label}' "
                        "is absent from the SVM training corpus"
                    )
                record.acc_orig = float(record.svm_converted == pair.emotion_label)

        if self.transcriber is not None:
            reference = self._reference_text(pair, source)
            record.hypothesis = self.transcriber(converted)
            if reference:
                record.cer = character_error_rate(reference, record.hypothesis)
            else:
                logger.warning(f"Pair {pair.pair_id}: empty reference transcription, CER skipped")
        return record

    def _reference_text(self, pair: ConversionPair, source: Waveform) -> str:
        if self.cfg.evaluation.cer_reference == "transcript" and pair.transcript:
            return pair.transcript
        return self.transcriber(source)

    def evaluate(self, pairs: Sequence[ConversionPair]) -> MetricReport:
        records = []
        sources: list[Waveform] = []
        converted: list[Waveform] = []
        for pair in pairs:
            source, conv = self._load(pair.source_path), self._load(pair.converted_path)
            records.append(self.evaluate_pair(pair, source, conv))
            sources.append(source)
            converted.append(conv)
        logger.info(f"Evaluated {len(records)} pairs")

        report = MetricReport(pairs=records, groups=aggregate(records))
        if self.verifier is not None:
            genuine, impostor = verification_scores(pairs, sources, converted, self.verifier)
            report.genuine_scores = genuine
            report.impostor_scores = impostor
            if genuine and impostor:
                report.eer = equal_error_rate(genuine, impostor)
                if report.groups.get("all") is None:
                    report.groups["all"] = GroupRow(group="all", n_pairs=len(records))
                report.groups["all"].columns["eer"] = ColumnStats(
                    mean=report.eer, std=0.0, n=len(genuine)
                )
            else:
                logger.warning("No impostor trials (single source speaker); EER is absent")
        return report


def verification_scores(
    pairs: Sequence[ConversionPair],
    sources: Sequence[Waveform],
    converted: Sequence[Waveform],
    verifier: Verifier,
) -> tuple[list[float], list[float]]:
    """Genuine: converted vs its own source; impostor: converted vs other speakers' sources."""
    genuine, impostor = [], []
    for i, pair in enumerate(pairs):
        genuine.append(verifier(sources[i], converted[i]))
        for j, other in enumerate(pairs):
            if other.source_speaker != pair.source_speaker:
                impostor.append(verifier(sources[j], converted[i]))
    return genuine, impostor


def aggregate(records: Sequence[PairMetrics]) -> dict[str, GroupRow | None]:
    """Mean and population std per group and column, from the member records only."""
    members: dict[str, list[PairMetrics]] = {}
    for record in records:
        for group in record.groups:
            members.setdefault(group, []).append(record)

    groups: dict[str, GroupRow | None] = {}
    for group, rows in members.items():
        columns: dict[str, ColumnStats | None] = {}
        for column in PAIR_COLUMNS:
            values = [getattr(r, column) for r in rows if getattr(r, column) is not None]
            stats = column_stats(values)
            columns[column] = (
                ColumnStats(mean=stats[0], std=stats[1], n=len(values)) if stats else None
            )
        if all(value is None for value in columns.values()):
            groups[group] = None
        else:
            groups[group] = GroupRow(group=group, n_pairs=len(rows), columns=columns)
    return groups


def evaluate_corpus(
    pairs: Sequence[ConversionPair],
    cfg: Config,
    svm: EmotionSVM | None = None,
    extractor: EmbeddingExtractor | None = None,
    transcriber: Transcriber | None = None,
    verifier: Verifier | None = None,
) -> MetricReport:
    return CorpusEvaluator(cfg, svm, extractor, transcriber, verifier).evaluate(pairs)


def _cell(stats: ColumnStats | None, column: str) -> str:
    if stats is None:
        return "absent"
    if column == "eer":
        return f"{stats.mean:.4f}"
    return f"{stats.mean:.4f} ({stats.std:.4f})"


def summary_rows(report: MetricReport) -> list[list[str]]:
    rows = [["group", "n_pairs", *TABLE_COLUMNS]]
    for group in _ordered_groups(report):
        row = report.groups[group]
        if row is None:
            rows.append([group, "0", *["absent"] * len(TABLE_COLUMNS)])
            continue
        cells = [_cell(row.columns.get(column), column) for column in TABLE_COLUMNS]
        rows.append([group, str(row.n_pairs), *cells])
    return rows


def _ordered_groups(report: MetricReport) -> list[str]:
    rest = sorted(g for g in report.groups if g != "all")
    return (["all"] if "all" in report.groups else []) + rest


def render_markdown(report: MetricReport) -> str:
    rows = summary_rows(report)
    lines = [
        "# Conversion Evaluation Report",
        "",
        f"**Pairs**: {len(report.pairs)}",
        f"**Flagged PCC pairs**: {sum(1 for p in report.pairs if p.pcc_flagged)}",
        "",
        "Mean and population standard deviation (in brackets).",
        "",
        "| " + " | ".join(rows[0]) + " |",
        "|" + "|".join("---" for _ in rows[0]) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows[1:])
    return "\n".join(lines) + "\n"


def write_report(report: MetricReport, out_dir: str | Path) -> dict[str, Path]:
    """Write ``report.json``, ``pairs.jsonl``, ``summary.tsv`` and ``report.md``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "pairs": out_dir / "pairs.jsonl",
        "summary": out_dir / "summary.tsv",
        "markdown": out_dir / "report.md",
    }
    paths["report"].write_text(report.model_dump_json(indent=2), encoding="utf-8")
    with open(paths["pairs"], "w", encoding="utf-8") as f:
        for record in report.pairs:
            f.write(record.model_dump_json() + "\n")
    with open(paths["summary"], "w", encoding="utf-8", newline="") as f:
        csv.writer(f, delimiter="\t").writerows(summary_rows(report))
    paths["markdown"].write_text(render_markdown(report), encoding="utf-8")
    logger.info(f"Report written to {out_dir}")
    return paths


def load_report(path: str | Path) -> MetricReport:
    """Load ``report.json`` from a file or a report directory."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    return MetricReport.model_validate_json(path.read_text(encoding="utf-8"))


def build_evaluator(
    cfg: Config,
    pairs: Sequence[ConversionPair],
    extractor_path: str | None = None,
    ling_net_path: str | None = None,
    svm_manifest: str | None = None,
) -> CorpusEvaluator:
    """Assemble the default back-ends.

    The SVM trains on the train split of ``svm_manifest`` when given,
    otherwise on the labelled sources of the corpus itself.
    """
    extractor = None
    if extractor_path:
        extractor = EmbeddingExtractor(StyleEncoder(cfg.models.n_emotions, cfg.models))
        load_component(extractor_path, extractor)
    else:
        logger.warning("No extractor given; the embedding MAE column is absent")

    transcriber = None
    if ling_net_path:
        ling_net = load_component(ling_net_path, LingNet(cfg.audio.n_mels, cfg.models))
        transcriber = LingNetTranscriber(ling_net, cfg)
    else:
        logger.warning("No linguistic network given; the CER column is absent")

    if svm_manifest:
        manifest = load_manifest(svm_manifest)
        labelled = [e for e in manifest.split("train") if e.is_labelled]
        paths = [str(manifest.resolve(e)) for e in labelled]
        labels = [e.emotion_label for e in labelled]
    else:
        labelled_pairs = [p for p in pairs if p.emotion_label is not None]
        paths = [p.source_path for p in labelled_pairs]
        labels = [p.emotion_label for p in labelled_pairs]

    svm = None
    if len(set(labels)) >= 2:
        features = np.stack([utterance_features(_resampled(p, cfg), cfg) for p in paths])
        svm = EmotionSVM(cfg.evaluation.svm_c, cfg.evaluation.svm_gamma).fit(features, labels)
    else:
        logger.warning("Fewer than two labelled emotions; the SVM accuracy columns are absent")

    return CorpusEvaluator(cfg, svm, extractor, transcriber, VoiceprintVerifier(cfg))


def _resampled(path: str, cfg: Config) -> Waveform:
    waveform = load_waveform(path)
    if waveform.sample_rate != cfg.audio.sample_rate:
        waveform = resample(waveform, cfg.audio.sample_rate)
    return waveform


def run_evaluation(
    cfg: Config,
    pairs_path: str | Path,
    report_dir: str | Path,
    extractor_path: str | None = None,
    ling_net_path: str | None = None,
    svm_manifest: str | None = None,
) -> MetricReport:
    pairs = load_pairs(pairs_path)
    evaluator = build_evaluator(cfg, pairs, extractor_path, ling_net_path, svm_manifest)
    report = evaluator.evaluate(pairs)
    write_report(report, report_dir)
    return report


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Evaluate a corpus of converted utterances")
    parser.add_argument("--pairs", required=True, help="Pairs JSONL file")
    parser.add_argument("--report", required=True, help="Output directory for the report")
    parser.add_argument(
        "--config",
        type=str,
        default="configs/config-default.yaml",
        help="Config file to use",
    )
    parser.add_argument("--extractor", help="Emotion embedding extractor checkpoint")
    parser.add_argument("--ling-net", help="Linguistic network checkpoint (for CER)")
    parser.add_argument("--svm-manifest", help="Manifest whose train split trains the SVM")
    parser.add_argument("--log-level", default=None, help="Override the configured log level")
    args = parser.parse_args(argv)

    try:
        cfg = get_config(args.config)
        setup_run_logging(
            log_dir=cfg.logging.log_dir,
            log_level=args.log_level or cfg.logging.level,
            silence_third_party=cfg.logging.silence_third_party,
            third_party_level=cfg.logging.third_party_level,
        )
        report = run_evaluation(
            cfg, args.pairs, args.report, args.extractor, args.ling_net, args.svm_manifest
        )
    except EmoStarGANError as e:
        print(f"error={e.category} message={e}", file=sys.stderr)
        return e.exit_code
    except (FileNotFoundError, ValueError) as e:
        print(f"error=runtime message={e}", file=sys.stderr)
        return 1
    print(render_markdown(report))
    return 0


def cli_main():
    """
    Synchronous CLI entry point (for poetry scripts).
    """
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
