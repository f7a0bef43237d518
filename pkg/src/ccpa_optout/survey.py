"""Survey response ingestion and Likert summaries.

Responses arrive as a CSV table with the fixed header
``respondent_id,condition,Q1,...,Q12``. Answer cells must match the
questionnaire's option strings exactly; empty cells are non-responses.
Q6 and Q7 are follow-ups that only apply to respondents who have opted
out at least once, so answers there despite "Never Have" on Q5 reject
the row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .analytics import round1

_US_STATES = (
    "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado",
    "Connecticut", "Delaware", "Florida", "Georgia", "Hawaii", "Idaho",
    "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky", "Louisiana",
    "Maine", "Maryland", "Massachusetts", "Michigan", "Minnesota",
    "Mississippi", "Missouri", "Montana", "Nebraska", "Nevada",
    "New Hampshire", "New Jersey", "New Mexico", "New York",
    "North Carolina", "North Dakota", "Ohio", "Oklahoma", "Oregon",
    "Pennsylvania", "Rhode Island", "South Carolina", "South Dakota",
    "Tennessee", "Texas", "Utah", "Vermont", "Virginia", "Washington",
    "West Virginia", "Wisconsin", "Wyoming",
)

# Exact option vocabularies, in scale order where the scale is ordered.
VOCABULARIES: dict[str, tuple[str, ...]] = {
    "Q2": (
        "Very Comfortable",
        "Somewhat comfortable",
        "Neutral",
        "Somewhat uncomfortable",
        "Very uncomfortable",
    ),
    "Q3": ("Yes", "No"),
    "Q4": ("Never", "A few times", "Sometimes", "Often", "Always"),
    "Q5": ("Never Have", "Have a few times", "Sometimes", "Usually", "Always"),
    "Q6": ("Somewhat difficult", "Neither difficult nor easy", "Somewhat easy", "Very easy"),
    "Q7": (
        "Very satisfied",
        "Somewhat satisfied",
        "Neutral",
        "Somewhat unsatisfied",
        "Very unsatisfied",
    ),
    "Q8": ("18-24", "25-34", "35-44", "45-59", "60-74", "75+"),
    "Q9": ("Man", "Woman", "Non-binary person", "Other"),
    "Q10": (
        "White",
        "Black or African American",
        "American Indian or Alaska Native",
        "Asian",
        "Pacific Islander or Native Hawaiian",
        "Other",
    ),
    "Q11": ("Yes", "No"),
    "Q12": _US_STATES + ("D.C.", "Puerto Rico", "Not in US"),
}

QUESTION_IDS = tuple(f"Q{i}" for i in range(1, 13))
MULTI_SELECT = ("Q10",)
EXPECTED_HEADER = ("respondent_id", "condition") + QUESTION_IDS

DIFFICULT_OR_WORSE = ("Somewhat difficult",)
UNSATISFIED_OR_WORSE = ("Somewhat unsatisfied", "Very unsatisfied")


class SurveyFormatError(ValueError):
    """Raised when the CSV header does not match the questionnaire."""


def load_survey_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SurveyFormatError("empty survey file") from None
        if header != EXPECTED_HEADER:
            raise SurveyFormatError(
                f"expected header {','.join(EXPECTED_HEADER)}, got {','.join(header)}"
            )
        rows = []
        for values in reader:
            if not any(v.strip() for v in values):
                continue
            values = list(values) + [""] * (len(EXPECTED_HEADER) - len(values))
            rows.append(dict(zip(EXPECTED_HEADER, values)))
        return rows


def _validate_row(row: dict[str, str]) -> str | None:
    """Return a rejection reason, or None when the row is clean."""
    cond = row.get("condition", "").strip()
    if cond not in ("", "observational", "coa"):
        return f"condition: unknown value {cond!r}"
    q1 = row.get("Q1", "").strip()
    if q1:
        try:
            value = int(q1)
        except ValueError:
            return f"Q1: not an integer percentage: {q1!r}"
        if not 0 <= value <= 100:
            return f"Q1: out of range 0-100: {value}"
    for qid in QUESTION_IDS[1:]:
        answer = row.get(qid, "").strip()
        if not answer:
            continue
        options = VOCABULARIES[qid]
        parts = [p.strip() for p in answer.split(";")] if qid in MULTI_SELECT else [answer]
        for part in parts:
            if part not in options:
                return f"{qid}: unknown option {part!r}"
    if row.get("Q5", "").strip() == "Never Have":
        for qid in ("Q6", "Q7"):
            if row.get(qid, "").strip():
                return f"{qid}: answered despite 'Never Have' on Q5"
    return None


@dataclass(frozen=True)
class LikertSummary:
    """Distribution over one question's answer scale.

    Percentages are over respondents answering the question, except for
    the multi-select race question where they are over mentions.
    """

    question: str
    counts: dict[str, int]
    n_answered: int
    thresholds: dict[str, float] = field(default_factory=dict)

    def pct(self, option: str) -> float | None:
        if self.n_answered == 0:
            return None
        return round1(Fraction(self.counts.get(option, 0) * 100, self.n_answered))


@dataclass(frozen=True)
class SurveySummary:
    wave: str
    n_respondents: int
    rejected: tuple[tuple[int, str], ...]  # (row index, reason)
    questions: tuple[LikertSummary, ...]
    by_condition: dict[str, tuple[LikertSummary, ...]]
    perceived_mean: Fraction | None
    perceived_mean_by_condition: dict[str, Fraction | None]


def _summarize_rows(rows: Sequence[dict[str, str]]) -> tuple[LikertSummary, ...]:
    summaries = []
    for qid in QUESTION_IDS[1:]:
        counts: dict[str, int] = {opt: 0 for opt in VOCABULARIES[qid]}
        n_answered = 0
        n_mentions = 0
        for row in rows:
            answer = row.get(qid, "").strip()
            if not answer:
                continue
            n_answered += 1
            parts = [p.strip() for p in answer.split(";")] if qid in MULTI_SELECT else [answer]
            for part in parts:
                counts[part] += 1
                n_mentions += 1
        denominator = n_mentions if qid in MULTI_SELECT else n_answered
        thresholds: dict[str, float] = {}
        if denominator:
            if qid == "Q6":
                hit = sum(counts[o] for o in DIFFICULT_OR_WORSE)
                thresholds["somewhat_difficult_or_worse"] = round1(
                    Fraction(hit * 100, denominator)
                )
            elif qid == "Q7":
                hit = sum(counts[o] for o in UNSATISFIED_OR_WORSE)
                thresholds["somewhat_unsatisfied_or_worse"] = round1(
                    Fraction(hit * 100, denominator)
                )
        summaries.append(
            LikertSummary(
                question=qid, counts=counts, n_answered=denominator, thresholds=thresholds
            )
        )
    return tuple(summaries)


def _perceived_mean(rows: Sequence[dict[str, str]]) -> Fraction | None:
    values = [int(r["Q1"].strip()) for r in rows if r.get("Q1", "").strip()]
    if not values:
        return None
    return Fraction(sum(values), len(values))


def summarize_survey(rows: Sequence[dict[str, str]], wave: str) -> SurveySummary:
    """Validate rows and summarize each question's answer distribution.

    Rows with out-of-vocabulary answers or skip-logic violations are
    rejected (reported by index) and excluded from every statistic.
    """
    if wave not in ("pre", "post"):
        raise ValueError("wave must be 'pre' or 'post'")
    valid: list[dict[str, str]] = []
    rejected: list[tuple[int, str]] = []
    for i, row in enumerate(rows):
        reason = _validate_row(row)
        if reason is None:
            valid.append(row)
        else:
            rejected.append((i, reason))

    conditions = sorted({r["condition"].strip() for r in valid if r["condition"].strip()})
    by_condition = {
        cond: _summarize_rows([r for r in valid if r["condition"].strip() == cond])
        for cond in conditions
    }
    perceived_by_cond = {
        cond: _perceived_mean([r for r in valid if r["condition"].strip() == cond])
        for cond in conditions
    }
    return SurveySummary(
        wave=wave,
        n_respondents=len(valid),
        rejected=tuple(rejected),
        questions=_summarize_rows(valid),
        by_condition=by_condition,
        perceived_mean=_perceived_mean(valid),
        perceived_mean_by_condition=perceived_by_cond,
    )
