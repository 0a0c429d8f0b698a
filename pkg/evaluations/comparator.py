"""
Report Comparator - compare two evaluation reports

Builds a Markdown table of per-column means for a baseline and a candidate
run, per group, followed by paired t-tests on the per-pair PCC and embedding
MAE columns.
"""

from __future__ import annotations

import logging

from .metrics import paired_ttest
from .schemas import TABLE_COLUMNS, MetricReport

logger = logging.getLogger(__name__)

# lower is better for these columns
LOWER_IS_BETTER = {"embedding_mae", "cer"}
TTEST_COLUMNS = ("pcc", "embedding_mae")


class ReportComparator:
    """
    Compares a candidate report against a baseline.

    Generates Markdown tables with per-group means and deltas.
    """

    def __init__(self, baseline: MetricReport, candidate: MetricReport):
        self.baseline = baseline
        self.candidate = candidate

    def compare(self) -> str:
        lines = [
            "# Evaluation Comparison Report",
            "",
            f"**Baseline pairs**: {len(self.baseline.pairs)}",
            f"**Candidate pairs**: {len(self.candidate.pairs)}",
            "",
            "---",
            "",
        ]
        for group in self._groups():
            lines.extend(self._generate_group_table(group))
            lines.append("")
        lines.extend(self._generate_ttest_lines())
        return "\n".join(lines)

    def _groups(self) -> list[str]:
        names = set(self.baseline.groups) | set(self.candidate.groups)
        rest = sorted(n for n in names if n != "all")
        return (["all"] if "all" in names else []) + rest

    @staticmethod
    def _mean(report: MetricReport, group: str, column: str) -> float | None:
        row = report.groups.get(group)
        if row is None:
            return None
        stats = row.columns.get(column)
        return stats.mean if stats is not None else None

    def _generate_group_table(self, group: str) -> list[str]:
        lines = [
            f"## {group}",
            "",
            "| Metric | Baseline | Candidate | Delta | Better |",
            "|--------|----------|-----------|-------|--------|",
        ]
        for column in TABLE_COLUMNS:
            base = self._mean(self.baseline, group, column)
            cand = self._mean(self.candidate, group, column)
            if base is None or cand is None:
                lines.append(f"| {column} | {_fmt(base)} | {_fmt(cand)} | - | - |")
                continue
            delta = cand - base
            if delta == 0:
                better = "="
            elif (delta < 0) == (column in LOWER_IS_BETTER):
                better = "candidate"
            else:
                better = "baseline"
            lines.append(f"| {column} | {base:.4f} | {cand:.4f} | {delta:+.4f} | {better} |")
        return lines

    def _generate_ttest_lines(self) -> list[str]:
        lines = ["## Paired t-tests", ""]
        for column in TTEST_COLUMNS:
            a, b = self._paired_values(column)
            if len(a) < 2:
                lines.append(f"- {column}: fewer than two paired values, test skipped")
                continue
            t, p = paired_ttest(b, a)
            lines.append(f"- {column}: n={len(a)} t={t:.4f} p={p:.4g}")
        return lines

    def _paired_values(self, column: str) -> tuple[list[float], list[float]]:
        """Values of pairs present in both reports with a value in both."""
        candidate = {p.pair_id: getattr(p, column) for p in self.candidate.pairs}
        a, b = [], []
        for pair in self.baseline.pairs:
            base_value = getattr(pair, column)
            cand_value = candidate.get(pair.pair_id)
            if base_value is not None and cand_value is not None:
                a.append(base_value)
                b.append(cand_value)
        return a, b


def _fmt(value: float | None) -> str:
    return "absent" if value is None else f"{value:.4f}"


def compare_reports(baseline: MetricReport, candidate: MetricReport) -> str:
    return ReportComparator(baseline, candidate).compare()
