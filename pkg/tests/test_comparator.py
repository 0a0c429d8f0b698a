"""Baseline-versus-candidate report comparison."""

from __future__ import annotations

from evaluations.comparator import compare_reports
from evaluations.corpus_evaluator import aggregate
from evaluations.schemas import MetricReport, PairMetrics


def _report(pcc: list[float], mae: list[float]) -> MetricReport:
    pairs = [
        PairMetrics(pair_id=f"p{i}", groups=["all", "sad"], pcc=p, embedding_mae=m)
        for i, (p, m) in enumerate(zip(pcc, mae, strict=True))
    ]
    return MetricReport(pairs=pairs, groups=aggregate(pairs))


def _row(markdown: str, group: str, column: str) -> list[str]:
    section = markdown.split(f"## {group}\n", 1)[1]
    line = next(line for line in section.splitlines() if line.startswith(f"| {column} |"))
    return [cell.strip() for cell in line.strip("|").split("|")]


def test_tables_mark_the_better_side_per_direction():
    baseline = _report([0.5, 0.6, 0.7], [0.30, 0.40, 0.50])
    candidate = _report([0.6, 0.7, 0.8], [0.20, 0.25, 0.45])

    markdown = compare_reports(baseline, candidate)

    assert "| Metric | Baseline | Candidate | Delta | Better |" in markdown
    assert _row(markdown, "all", "pcc") == ["pcc", "0.6000", "0.7000", "+0.1000", "candidate"]
    assert _row(markdown, "all", "embedding_mae")[-1] == "candidate"
    assert _row(markdown, "sad", "cer") == ["cer", "absent", "absent", "-", "-"]


def test_equal_means_are_a_tie():
    report = _report([0.5, 0.6], [0.1, 0.2])

    assert _row(compare_reports(report, report), "all", "pcc")[-1] == "="


def test_paired_tests_use_pairs_present_in_both():
    baseline = _report([0.5, 0.6, 0.7], [0.30, 0.40, 0.50])
    candidate = _report([0.6, 0.8, 0.9], [0.20, 0.25, 0.45])

    markdown = compare_reports(baseline, candidate)

    tests = markdown.split("## Paired t-tests", 1)[1]
    assert "- pcc: n=3" in tests
    assert "- embedding_mae: n=3" in tests


def test_paired_tests_are_skipped_without_two_pairs():
    markdown = compare_reports(_report([0.5], [0.1]), _report([0.6], [0.2]))

    assert "- pcc: fewer than two paired values, test skipped" in markdown
