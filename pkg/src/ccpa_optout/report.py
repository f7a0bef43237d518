"""Plot-ready report emission.

One CSV table per statistic plus a single human-readable summary.
Outputs are pure functions of the inputs: stable row order, one-decimal
percentages, no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .analytics import (
    ConditionComparison,
    FrequencyHistogram,
    MechanismBreakdown,
    PerceivedVsActual,
    UserSummary,
    compare_conditions,
    mean_optout_rate,
    mechanism_breakdown,
    optout_frequency_histogram,
    perceived_vs_actual,
    round1,
    summarize_users,
    visited_link_fraction,
)
from .crawler import CensusReport
from .survey import SurveySummary
from .telemetry import TelemetryEvent

TABLE_FILES = (
    "optout_frequency.csv",
    "mechanism_shares.csv",
    "condition_comparison.csv",
    "likert.csv",
    "perceived_vs_actual.csv",
)
SUMMARY_FILE = "summary.txt"


class PartialWriteError(RuntimeError):
    """A report file failed to write; ``written`` lists completed files."""

    def __init__(self, failed: str, cause: Exception, written: Sequence[str]) -> None:
        super().__init__(f"failed writing {failed}: {cause}; completed: {list(written)}")
        self.failed = failed
        self.written = tuple(written)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


def _csv_bytes(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_report(
    events: Sequence[TelemetryEvent],
    out_dir: str | Path,
    census: CensusReport | None = None,
    survey_pre: SurveySummary | None = None,
    survey_post: SurveySummary | None = None,
    histogram_condition: str = "coa",
) -> list[Path]:
    """Write every report table plus the text summary into ``out_dir``.

    Empty inputs produce header-only tables. Returns the written paths;
    raises PartialWriteError naming completed files when a write fails.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    summaries = summarize_users(events)
    cohort = [s for s in summaries if s.condition == histogram_condition]
    histogram = optout_frequency_histogram(cohort) if cohort else None

    breakdown: MechanismBreakdown | None
    try:
        breakdown = mechanism_breakdown(events)
    except ValueError:
        breakdown = None

    comparison: ConditionComparison | None
    try:
        comparison = compare_conditions(summaries) if summaries else None
    except ValueError:
        comparison = None

    perceived = survey_pre.perceived_mean if survey_pre is not None else None
    link_fraction = visited_link_fraction(events, condition=histogram_condition)
    comparison_table = perceived_vs_actual(perceived, census, link_fraction)

    contents: dict[str, str] = {}

    rows: list[Sequence[object]] = []
    if histogram is not None:
        rows = [(k, v) for k, v in histogram.bins.items()]
    contents["optout_frequency.csv"] = _csv_bytes(("optout_sites", "users"), rows)

    rows = []
    if breakdown is not None:
        rows = [
            (m, breakdown.counts[m], _fmt(breakdown.shares[m]))
            for m in ("optout_banner", "optout_menu", "optout_native")
        ]
    contents["mechanism_shares.csv"] = _csv_bytes(("mechanism", "count", "share_pct"), rows)

    rows = []
    if comparison is not None:
        p = format(comparison.p_value, ".12g")
        rows = [
            (cond, comparison.n_users[cond], comparison.n_opted_out[cond], p)
            for cond in ("observational", "coa")
        ]
    contents["condition_comparison.csv"] = _csv_bytes(
        ("condition", "n_users", "n_opted_out", "p_value"), rows
    )

    rows = []
    for wave_summary in (survey_pre, survey_post):
        if wave_summary is None:
            continue
        groups = [("all", wave_summary.questions)]
        groups += sorted(wave_summary.by_condition.items())
        for group, questions in groups:
            for q in questions:
                for option in q.counts:
                    rows.append(
                        (
                            wave_summary.wave,
                            group,
                            q.question,
                            option,
                            q.counts[option],
                            _fmt(q.pct(option)),
                        )
                    )
    contents["likert.csv"] = _csv_bytes(
        ("wave", "condition", "question", "option", "count", "pct"), rows
    )

    rows = []
    if comparison_table.perceived_mean is not None:
        rows.append(("perceived_mean", _fmt(comparison_table.perceived_mean)))
    for label, value in comparison_table.census_rows:
        rows.append((f"census {label} valid+ambiguous", _fmt(value)))
    if comparison_table.telemetry_link_pct is not None:
        rows.append(("telemetry visited link share", _fmt(comparison_table.telemetry_link_pct)))
    contents["perceived_vs_actual.csv"] = _csv_bytes(("source", "pct"), rows)

    contents[SUMMARY_FILE] = _summary_text(
        summaries, cohort, histogram, breakdown, comparison, survey_pre, survey_post, comparison_table
    )

    written: list[Path] = []
    for name in TABLE_FILES + (SUMMARY_FILE,):
        path = out_dir / name
        try:
            path.write_text(contents[name], encoding="utf-8")
        except OSError as exc:
            raise PartialWriteError(name, exc, [p.name for p in written]) from exc
        written.append(path)
    return written


def _summary_text(
    summaries: Sequence[UserSummary],
    cohort: Sequence[UserSummary],
    histogram: FrequencyHistogram | None,
    breakdown: MechanismBreakdown | None,
    comparison: ConditionComparison | None,
    survey_pre: SurveySummary | None,
    survey_post: SurveySummary | None,
    comparison_table: PerceivedVsActual,
) -> str:
    lines = ["Opt-out behavior report", "=" * 23, ""]
    by_cond: dict[str, int] = {}
    for s in summaries:
        by_cond[s.condition] = by_cond.get(s.condition, 0) + 1
    lines.append(f"Users: {len(summaries)} total " +
                 " ".join(f"({c}: {n})" for c, n in sorted(by_cond.items())))

    mean_rate = mean_optout_rate(cohort)
    if mean_rate is not None:
        lines.append(f"Mean opt-out rate over link sites (coa cohort): {round1(mean_rate * 100):.1f}%")
    if histogram is not None and histogram.pct_with_optout is not None:
        lines.append(f"Users with >=1 opt-out (coa cohort): {histogram.pct_with_optout:.1f}%")
    if breakdown is not None:
        shares = breakdown.shares
        lines.append(
            "Opt-out mechanism shares: banner "
            f"{shares['optout_banner']:.1f}% / menu {shares['optout_menu']:.1f}% / "
            f"native {shares['optout_native']:.1f}%"
        )
    if comparison is not None:
        lines.append(
            "Condition comparison (opted out at least once): "
            f"observational {comparison.n_opted_out['observational']}/{comparison.n_users['observational']}, "
            f"coa {comparison.n_opted_out['coa']}/{comparison.n_users['coa']}, "
            f"two-sided exact p = {format(comparison.p_value, '.12g')}"
        )
    for wave_summary in (survey_pre, survey_post):
        if wave_summary is None:
            continue
        for cond, questions in sorted(wave_summary.by_condition.items()):
            for q in questions:
                for name, value in q.thresholds.items():
                    lines.append(
                        f"Survey {wave_summary.wave} [{cond}] {q.question} {name}: {value:.1f}%"
                    )
    if comparison_table.perceived_mean is not None:
        lines.append(f"Perceived sell rate (survey mean): {comparison_table.perceived_mean:.1f}%")
    for label, value in comparison_table.census_rows:
        lines.append(f"Actual census {label} (valid+ambiguous): {value:.1f}%")
    if comparison_table.telemetry_link_pct is not None:
        lines.append(
            f"Visited sites bearing opt-out links: {comparison_table.telemetry_link_pct:.1f}%"
        )
    return "\n".join(lines) + "\n"
